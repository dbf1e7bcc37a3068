use arboreal::conj_aut::{canonical_representative, conj_graph, conjugate_in_aut};
use arboreal::conj_restricted::{choice_system, conjugate_in_finitary};
use arboreal::dot::{conj_graph_dot, dot_counts, order_graph_dot};
use arboreal::oracle::{random_bounded, truncate, verify_conjugator};
use arboreal::order::order_graph;
use arboreal::{parse_system, Element, Group};
use proptest::prelude::*;

fn load(seed: u64) -> (Group, Vec<Element>) {
    let system = random_bounded(seed, 4);
    let mut g = Group::new(system.alphabet);
    let syms = g.load(&system).unwrap();
    (g, syms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn systems_round_trip(seed in 0u64..10_000) {
        let system = random_bounded(seed, 4);
        let text = system.to_string();
        let again = parse_system(&text).unwrap();
        prop_assert_eq!(again.to_string(), text);
    }

    #[test]
    fn inverse_and_equality(seed in 0u64..10_000, i in 0usize..4, j in 0usize..4) {
        let (mut g, syms) = load(seed);
        let x = syms[i % syms.len()].clone();
        let y = syms[j % syms.len()].clone();
        let xy = g.multiply(&x, &y);
        let inv = g.inverse(&xy);
        let one = g.multiply(&xy, &inv);
        prop_assert!(g.is_trivial(&one).is_equal());
        prop_assert!(g.equal(&xy, &xy).is_equal());
        let yx = g.multiply(&y, &x);
        prop_assert_eq!(g.equal(&xy, &yx), g.equal(&yx, &xy));
        // keys agree with equality
        let (kx, ky) = (g.key(&xy), g.key(&yx));
        prop_assert_eq!(kx == ky, g.equal(&xy, &yx).is_equal());
    }

    #[test]
    fn truncation_is_a_homomorphism(seed in 0u64..10_000, n in 1usize..7) {
        let (mut g, syms) = load(seed);
        let x = syms[0].clone();
        let y = syms[syms.len() - 1].clone();
        let xy = g.multiply(&x, &y);
        let (tx, ty, txy) = (
            truncate(&mut g, &x, n).unwrap(),
            truncate(&mut g, &y, n).unwrap(),
            truncate(&mut g, &xy, n).unwrap(),
        );
        for k in 0..=n {
            let (lx, ly, lxy) = (tx.level(k), ty.level(k), txy.level(k));
            prop_assert!((0..lx.len()).all(|w| lxy[w] == ly[lx[w] as usize]));
        }
    }

    #[test]
    fn conjugates_are_recognized(seed in 0u64..10_000) {
        let (mut g, syms) = load(seed);
        let a = g.multiply(&syms[0], &syms[syms.len() - 1]);
        let h = syms[syms.len() / 2].clone();
        let b = g.conjugate(&a, &h);
        let d = conjugate_in_aut(&mut g, &a, &b, 200).unwrap();
        let c = d.conjugator().expect("conjugate by construction").clone();
        prop_assert!(verify_conjugator(&mut g, &c.element, &a, &b, 10).unwrap());
        let ra = canonical_representative(&mut g, &a, 6).unwrap();
        let rb = canonical_representative(&mut g, &b, 6).unwrap();
        prop_assert_eq!(ra, rb);
    }

    #[test]
    fn matrix_columns_sum_to_degree(seed in 0u64..10_000) {
        let (mut g, syms) = load(seed);
        let a = syms[syms.len() - 1].clone();
        let b = g.conjugate(&a, &syms[0]);
        let Some(sys) = choice_system(&mut g, &a, &b, 200).unwrap() else { return Ok(()) };
        for choice in sys.choices().take(16) {
            let m = sys.matrix(&choice);
            for (c, opts) in sys.options.iter().enumerate() {
                if opts.is_empty() {
                    continue;
                }
                let len = sys.configurations[c].dp.len();
                for col in sys.offsets[c]..sys.offsets[c] + len {
                    let sum: u128 = (0..sys.dim).map(|r| m[r][col]).sum();
                    prop_assert_eq!(sum, 2);
                }
            }
        }
    }

    #[test]
    fn finitary_conjugators_verify(seed in 0u64..10_000) {
        let (mut g, syms) = load(seed);
        let a = syms[syms.len() - 1].clone();
        let b = g.conjugate(&a, &syms[0]);
        let d = conjugate_in_finitary(&mut g, &a, &b, 200).unwrap();
        if let Some(c) = d.conjugator() {
            let h = c.element.clone();
            prop_assert!(verify_conjugator(&mut g, &h, &a, &b, 10).unwrap());
            prop_assert!(matches!(c.class, Some(arboreal::classify::ActivityClass::Finitary(_))));
        }
    }

    #[test]
    fn dot_matches_graphs(seed in 0u64..10_000) {
        let (mut g, syms) = load(seed);
        let a = syms[syms.len() - 1].clone();
        if let Some(og) = order_graph(&mut g, &a, 200) {
            let (nodes, _) = dot_counts(&order_graph_dot(&g, &og));
            prop_assert_eq!(nodes, og.vertices().len());
        }
        if let Some(cg) = conj_graph(&mut g, &a, &a, 200).unwrap() {
            let (nodes, _) = dot_counts(&conj_graph_dot(&g, &cg));
            prop_assert_eq!(nodes, cg.vertices.len());
        }
    }
}

#[test]
fn small_graph_shapes() {
    let mut g = Group::parse("alphabet 2\ns = (e, e) [1 0]\nc = (c, s)\nb = (a, b)\na = (e, a) [1 0]").unwrap();
    let c = g.element("c").unwrap();
    let og = order_graph(&mut g, &c, 200).unwrap();
    assert_eq!(dot_counts(&order_graph_dot(&g, &og)), (3, 4));
    let e = Element::identity();
    let cg = conj_graph(&mut g, &e, &e, 200).unwrap().unwrap();
    assert_eq!(dot_counts(&conj_graph_dot(&g, &cg)).0, 2);
    let a = g.element("a").unwrap();
    let cg = conj_graph(&mut g, &a, &e, 200).unwrap().unwrap();
    assert_eq!(dot_counts(&conj_graph_dot(&g, &cg)).0, 0);
}
