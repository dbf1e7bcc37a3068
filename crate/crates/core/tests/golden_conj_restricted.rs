use arboreal::classify::ActivityClass;
use arboreal::conj_restricted::{
    bounded_choice_search, choice_system, configurations, conjugate_by_choice_search,
    conjugate_in_finitary, conjugate_in_pol0_cyclic, conjugate_in_pol_inf, ChoiceBounds,
    ChoiceSearch, SearchCaps,
};
use arboreal::{Element, Group, Perm, TRIVIAL};

const CAP: usize = 200;

fn adding() -> (Group, Element, Element) {
    let mut g = Group::parse("alphabet 2\na = (e, a) [1 0]").unwrap();
    let a = g.element("a").unwrap();
    let ai = g.inverse(&a);
    (g, a, ai)
}

fn pair_bc() -> (Group, Element, Element) {
    let mut g = Group::parse("alphabet 2\ns = (e, e) [1 0]\nb = (s, b)\nc = (c, s)\na = (e, a) [1 0]").unwrap();
    let b = g.element("b").unwrap();
    let c = g.element("c").unwrap();
    (g, b, c)
}

fn eps() -> Perm {
    Perm::identity(2)
}

fn sigma() -> Perm {
    Perm::swap01(2)
}

fn m(rows: [[u128; 3]; 3]) -> Vec<Vec<u128>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

#[test]
fn adding_machine_and_inverse_configurations() {
    let (mut g, a, ai) = adding();
    let confs = configurations(&mut g, &a, &ai, CAP).unwrap().unwrap();
    assert_eq!(confs.len(), 2);
    let ka = g.key(&a).unwrap();
    let kai = g.key(&ai).unwrap();
    assert_eq!((confs[0].alpha, confs[0].beta), (ka, kai));
    assert_eq!(confs[0].dp, vec![(TRIVIAL, TRIVIAL)]);
    assert_eq!((confs[1].alpha, confs[1].beta), (ka, kai));
    assert_eq!(confs[1].dp, vec![(TRIVIAL, TRIVIAL), (TRIVIAL, kai)]);
}

#[test]
fn adding_machine_and_inverse_matrices() {
    let (mut g, a, ai) = adding();
    let sys = choice_system(&mut g, &a, &ai, CAP).unwrap().unwrap();
    assert_eq!(sys.dim, 3);
    assert_eq!(sys.u0, vec![1, 0, 0]);
    assert_eq!(sys.choice_count(), 4);
    let cases = [
        ([eps(), eps()], [[0, 0, 0], [1, 1, 0], [1, 1, 2]], [0, 0, 1]),
        ([eps(), sigma()], [[0, 0, 0], [1, 2, 1], [1, 0, 1]], [0, 1, 0]),
        ([sigma(), eps()], [[2, 0, 0], [0, 1, 0], [0, 1, 2]], [1, 0, 1]),
        ([sigma(), sigma()], [[2, 0, 0], [0, 2, 1], [0, 0, 1]], [1, 1, 0]),
    ];
    for (perms, matrix, theta) in cases {
        let choice = sys.choice_of(&perms).unwrap();
        assert_eq!(sys.matrix(&choice), m(matrix), "{perms:?}");
        assert_eq!(sys.theta(&choice), theta.to_vec(), "{perms:?}");
    }
    assert_eq!(
        bounded_choice_search(&sys, ChoiceBounds::default()),
        ChoiceSearch::NotFoundWithinBounds
    );
}

#[test]
fn adding_machine_and_inverse_not_conjugate_in_restricted_groups() {
    let (mut g, a, ai) = adding();
    assert!(conjugate_in_finitary(&mut g, &a, &ai, CAP).unwrap().is_not_conjugate());
    assert!(conjugate_in_pol0_cyclic(&mut g, &a, &ai, SearchCaps::default())
        .unwrap()
        .is_not_conjugate());
    assert!(conjugate_in_pol_inf(&mut g, &a, &ai, SearchCaps::default())
        .unwrap()
        .is_not_conjugate());
}

#[test]
fn bounded_pair_configurations_and_matrix() {
    let (mut g, b, c) = pair_bc();
    let confs = configurations(&mut g, &b, &c, CAP).unwrap().unwrap();
    assert_eq!(confs.len(), 3);
    let s = g.element("s").unwrap();
    let ks = g.key(&s).unwrap();
    assert_eq!((confs[0].alpha, confs[0].beta), (g.key(&b).unwrap(), g.key(&c).unwrap()));
    assert_eq!((confs[1].alpha, confs[1].beta), (ks, ks));
    assert_eq!((confs[2].alpha, confs[2].beta), (TRIVIAL, TRIVIAL));
    assert!(confs.iter().all(|k| k.dp == vec![(TRIVIAL, TRIVIAL)]));

    let sys = choice_system(&mut g, &b, &c, CAP).unwrap().unwrap();
    assert_eq!(sys.options[0], vec![sigma()]);
    assert_eq!(sys.options[1], vec![eps(), sigma()]);
    assert_eq!(sys.options[2], vec![eps(), sigma()]);
    let expected = m([[1, 0, 0], [1, 0, 0], [0, 2, 2]]);
    let cases = [
        ([sigma(), eps(), eps()], [1, 0, 0]),
        ([sigma(), sigma(), eps()], [1, 1, 0]),
        ([sigma(), eps(), sigma()], [1, 0, 1]),
        ([sigma(), sigma(), sigma()], [1, 1, 1]),
    ];
    for (perms, theta) in cases {
        let choice = sys.choice_of(&perms).unwrap();
        assert_eq!(sys.matrix(&choice), expected);
        assert_eq!(sys.theta(&choice), theta.to_vec());
    }
    // u_n = (1, 1, 2^n - 2)
    let choice = sys.choice_of(&[sigma(), eps(), eps()]).unwrap();
    let mut u = sys.u0.clone();
    for n in 1..=8u32 {
        u = sys.apply(&choice, &u, u128::MAX);
        assert_eq!(u, vec![1, 1, (1u128 << n) - 2]);
    }
    let act = sys.activity(&[], &[choice.clone()], 12, 1 << 16);
    assert!(act.iter().all(|&t| t == 1));
    match bounded_choice_search(&sys, ChoiceBounds::default()) {
        ChoiceSearch::Found { pre, period } => {
            assert!(pre.is_empty());
            assert_eq!(period, vec![choice]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn bounded_pair_conjugate_by_adding_machine() {
    let (mut g, b, c) = pair_bc();
    let a = g.element("a").unwrap();
    assert!(conjugate_in_finitary(&mut g, &b, &c, CAP).unwrap().is_not_conjugate());
    for decision in [
        conjugate_in_pol0_cyclic(&mut g, &b, &c, SearchCaps::default()).unwrap(),
        conjugate_by_choice_search(&mut g, &b, &c, CAP, ChoiceBounds::default()).unwrap(),
    ] {
        let h = decision.conjugator().expect("conjugate").clone();
        assert_eq!(h.exact, Some(true));
        assert_eq!(h.class, Some(ActivityClass::Polynomial(0)));
        assert!(g.equal(&h.element, &a).is_equal());
    }
}

#[test]
fn finitary_conjugator_found() {
    let mut g = Group::parse("alphabet 2\ns = (e, e) [1 0]\nt = (s, e)\na = (e, a) [1 0]").unwrap();
    let a = g.element("a").unwrap();
    let t = g.element("t").unwrap();
    let b = g.conjugate(&a, &t);
    let d = conjugate_in_finitary(&mut g, &a, &b, CAP).unwrap();
    let h = d.conjugator().expect("conjugate");
    assert!(matches!(h.class, Some(ActivityClass::Finitary(_))));
    let back = g.conjugate(&a, &h.element);
    assert!(g.equal(&back, &b).is_equal());
}

#[test]
fn unbounded_inputs_rejected() {
    let mut g = Group::parse("alphabet 2\ns = (e, e) [1 0]\nb = (b, b) [1 0]").unwrap();
    let b = g.element("b").unwrap();
    assert!(conjugate_in_finitary(&mut g, &b, &b, CAP).is_err());
}
