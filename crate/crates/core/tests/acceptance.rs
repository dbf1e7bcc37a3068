//! One pass/fail line per acceptance criterion.

use arboreal::classify::{nucleus, orbit_signalizer, polynomial_degree, ActivityClass, NucleusReport};
use arboreal::conj_aut::{
    all_basic_conjugators, conj_graph, conjugate_in_aut, conjugate_in_aut_simultaneous, conjugate_in_fsg,
    ConjDecision,
};
use arboreal::conj_restricted::{
    bounded_choice_search, choice_system, conjugate_in_finitary, conjugate_in_pol0_cyclic, conjugate_in_pol_inf,
    ChoiceBounds, ChoiceSearch, SearchCaps,
};
use arboreal::oracle::{orbit_tree_code, random_bounded, truncate, truncated_order, verify_conjugator};
use arboreal::order::{order, OrderResult};
use arboreal::{Element, Group, Perm};

const CAP: usize = 200;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn group(text: &str) -> Group {
    Group::parse(text).expect("valid system")
}

fn set_eq(g: &mut Group, xs: &[Element], ys: &[Element]) -> bool {
    xs.len() == ys.len()
        && xs.iter().all(|x| ys.iter().any(|y| g.equal(x, y).is_equal()))
        && ys.iter().all(|y| xs.iter().any(|x| g.equal(x, y).is_equal()))
}

fn criterion_1() -> Check {
    let mut g = group("alphabet 2\ns = (e, e) [1 0]\na = (e, a) [1 0]\nb = (a, b)\nc = (c, s)");
    for name in ["a", "b"] {
        let x = g.element(name).unwrap();
        ensure!(
            matches!(order(&mut g, &x, CAP), OrderResult::Infinite { .. }),
            "{name} should have infinite order"
        );
    }
    let b = g.element("b").unwrap();
    if let OrderResult::Infinite { labels, .. } = order(&mut g, &b, CAP) {
        ensure!(labels.contains(&2), "b: witness cycle lacks a label-2 edge");
    }
    let c = g.element("c").unwrap();
    ensure!(order(&mut g, &c, CAP) == OrderResult::Finite(2), "c should have order 2");
    Ok(())
}

fn criterion_2() -> Check {
    let mut g = group("alphabet 2\na = (e, a) [1 0]\nb = (a, b)\nf = (f, f) [1 0]\np = (a, q) [1 0]\nq = (a, p)");
    let a = g.element("a").unwrap();
    let b = g.element("b").unwrap();
    let f = g.element("f").unwrap();
    let p = g.element("p").unwrap();
    let os = orbit_signalizer(&mut g, &a, CAP);
    ensure!(os.is_complete() && set_eq(&mut g, &os.elements, &[a.clone()]), "OS(a) != {{a}}");
    let os = orbit_signalizer(&mut g, &b, CAP);
    ensure!(os.is_complete() && set_eq(&mut g, &os.elements, &[a.clone(), b.clone()]), "OS(b) != {{a, b}}");
    let os = orbit_signalizer(&mut g, &f, CAP);
    ensure!(
        os.is_complete() && set_eq(&mut g, &os.elements, &[Element::identity(), f.clone()]),
        "OS((f, f)s) != {{e, f}}"
    );
    let os = orbit_signalizer(&mut g, &p, CAP);
    ensure!(!os.is_complete(), "OS((a, c)s) should exceed {CAP}");
    Ok(())
}

fn criterion_3() -> Check {
    let mut g = group("alphabet 2\ns = (e, e) [1 0]\na = (e, a) [1 0]\nb = (a, b)\nf = (f, f) [1 0]\nn = (n, n^-1*n^-1) [1 0]");
    let cases = [
        ("a", ActivityClass::Polynomial(0)),
        ("b", ActivityClass::Polynomial(1)),
        ("f", ActivityClass::Exponential),
        ("s", ActivityClass::Finitary(1)),
    ];
    for (name, want) in cases {
        let x = g.element(name).unwrap();
        let got = polynomial_degree(&mut g, &x);
        ensure!(got == want, "{name}: {got} != {want}");
    }
    let n = g.element("n").unwrap();
    let NucleusReport::Contracting(nuc) = nucleus(&mut g, &n, 512, 12) else {
        return Err("nucleus of <n> not verified".into());
    };
    let want: Vec<Element> = (-3..=3).map(|i| g.power(&n, i)).collect();
    ensure!(set_eq(&mut g, &nuc, &want), "nucleus has {} elements, expected {{e, n^+-1, n^+-2, n^+-3}}", nuc.len());
    Ok(())
}

fn verified_all(g: &mut Group, a: &Element, b: &Element) -> Check {
    let graph = conj_graph(g, a, b, CAP).map_err(|e| e.to_string())?.ok_or("cap")?;
    for fr in all_basic_conjugators(g, &graph, 64) {
        let h = fr.element(g);
        ensure!(verify_conjugator(g, &h, a, b, 10).unwrap(), "basic conjugator fails at depth 10");
        if g.key(&h).is_some() {
            let c = g.conjugate(a, &h);
            ensure!(g.equal(&c, b).is_equal(), "basic conjugator fails the exact check");
        }
    }
    Ok(())
}

fn criterion_4() -> Check {
    let mut g = group("alphabet 2\na = (e, a) [1 0]\nb = (e, b^-1) [1 0]");
    let a = g.element("a").unwrap();
    let b = g.element("b").unwrap();
    let ai = g.inverse(&a);
    let e = Element::identity();
    for (x, y, n, label) in [(&e, &e, 2, "(e, e)"), (&a, &ai, 2, "(a, a^-1)"), (&a, &b, 4, "(a, b)")] {
        let graph = conj_graph(&mut g, x, y, CAP).unwrap().unwrap();
        ensure!(graph.vertices.len() == n, "Psi{label} has {} vertices, expected {n}", graph.vertices.len());
        let count = all_basic_conjugators(&mut g, &graph, 64).len();
        let want = if label == "(a, b)" { 4 } else { 2 };
        ensure!(count == want, "Psi{label}: {count} basic conjugators, expected {want}");
        verified_all(&mut g, x, y)?;
    }
    Ok(())
}

fn criterion_5() -> Check {
    let eps = Perm::identity(2);
    let sig = Perm::swap01(2);
    let mut g = group("alphabet 2\na = (e, a) [1 0]");
    let a = g.element("a").unwrap();
    let ai = g.inverse(&a);
    let sys = choice_system(&mut g, &a, &ai, CAP).unwrap().ok_or("cap")?;
    ensure!(sys.dim == 3, "dimension {} != 3", sys.dim);
    let printed: [([&Perm; 2], [[u128; 3]; 3], [u8; 3]); 4] = [
        ([&eps, &eps], [[0, 0, 0], [1, 1, 0], [1, 1, 2]], [0, 0, 1]),
        ([&eps, &sig], [[0, 0, 0], [1, 2, 1], [1, 0, 1]], [0, 1, 0]),
        ([&sig, &eps], [[2, 0, 0], [0, 1, 0], [0, 1, 2]], [1, 0, 1]),
        ([&sig, &sig], [[2, 0, 0], [0, 2, 1], [0, 0, 1]], [1, 1, 0]),
    ];
    for (perms, m, th) in printed {
        let perms: Vec<Perm> = perms.iter().map(|p| (*p).clone()).collect();
        let c = sys.choice_of(&perms).ok_or("missing choice")?;
        let m: Vec<Vec<u128>> = m.iter().map(|r| r.to_vec()).collect();
        ensure!(sys.matrix(&c) == m, "A{perms:?} differs");
        ensure!(sys.theta(&c) == th.to_vec(), "theta{perms:?} differs");
    }
    ensure!(
        bounded_choice_search(&sys, ChoiceBounds::default()) == ChoiceSearch::NotFoundWithinBounds,
        "a bounded choice was found for (a, a^-1)"
    );
    let caps = SearchCaps::default();
    ensure!(conjugate_in_finitary(&mut g, &a, &ai, CAP).unwrap().is_not_conjugate(), "(a, a^-1) in Pol(-1)");
    ensure!(conjugate_in_pol0_cyclic(&mut g, &a, &ai, caps).unwrap().is_not_conjugate(), "(a, a^-1) in Pol(0)");
    ensure!(conjugate_in_pol_inf(&mut g, &a, &ai, caps).unwrap().is_not_conjugate(), "(a, a^-1) in Pol(inf)");

    let mut g = group("alphabet 2\ns = (e, e) [1 0]\nb = (s, b)\nc = (c, s)\na = (e, a) [1 0]");
    let b = g.element("b").unwrap();
    let c = g.element("c").unwrap();
    let adding = g.element("a").unwrap();
    let sys = choice_system(&mut g, &b, &c, CAP).unwrap().ok_or("cap")?;
    let shared: Vec<Vec<u128>> = vec![vec![1, 0, 0], vec![1, 0, 0], vec![0, 2, 2]];
    for choice in sys.choices() {
        ensure!(sys.matrix(&choice) == shared, "A_pi differs for {choice:?}");
        let mut u = sys.u0.clone();
        for n in 1..=10u32 {
            u = sys.apply(&choice, &u, u128::MAX);
            ensure!(u == vec![1, 1, (1u128 << n) - 2], "u_{n} differs under {choice:?}");
        }
    }
    let constant = sys.choice_of(&[sig.clone(), eps.clone(), eps.clone()]).ok_or("missing choice")?;
    ensure!(
        sys.activity(&[], &[constant], 11, 1 << 16).iter().all(|&t| t == 1),
        "theta_n != 1 under the constant choice"
    );
    let d = conjugate_in_pol0_cyclic(&mut g, &b, &c, caps).unwrap();
    let h = d.conjugator().ok_or("(b, c) not conjugate in Pol(0)")?.clone();
    ensure!(h.machine_states == Some(2), "conjugator has {:?} states", h.machine_states);
    ensure!(g.equal(&h.element, &adding).is_equal(), "conjugator is not the adding machine");
    ensure!(conjugate_in_finitary(&mut g, &b, &c, CAP).unwrap().is_not_conjugate(), "(b, c) in Pol(-1)");
    Ok(())
}

struct Stats {
    systems: usize,
    conjugate_pairs: usize,
    not_conjugate_same_code: usize,
}

fn shipped(g: &mut Group, d: &ConjDecision, a: &Element, b: &Element) -> Check {
    if let Some(h) = d.conjugator() {
        ensure!(
            verify_conjugator(g, &h.element, a, b, 10).unwrap(),
            "conjugator for `{}` -> `{}` fails at depth 10",
            g.display(a),
            g.display(b)
        );
    }
    Ok(())
}

fn laws(g: &mut Group, x: &Element, y: &Element) -> Check {
    let n = 8;
    let xy = g.multiply(x, y);
    let tx = truncate(g, x, n).unwrap();
    let ty = truncate(g, y, n).unwrap();
    let txy = truncate(g, &xy, n).unwrap();
    let (lx, ly, lxy) = (tx.level(n), ty.level(n), txy.level(n));
    ensure!((0..lx.len()).all(|w| lxy[w] == ly[lx[w] as usize]), "(xy) != x then y");
    let xi = g.inverse(x);
    let txi = truncate(g, &xi, n).unwrap();
    ensure!((0..lx.len()).all(|w| txi.level(n)[lx[w] as usize] as usize == w), "x^-1 x != e");
    for letter in 0..2 {
        // (xy)|_v = x|_v y|_(v^x)
        let lhs = g.section(&xy, letter);
        let xs = g.section(x, letter);
        let ys = g.section(y, g.image(x, letter));
        let rhs = g.multiply(&xs, &ys);
        ensure!(g.equal(&lhs, &rhs).is_equal(), "section rule fails");
        // (v w)^x = v^x w^(x|_v)
        let ts = truncate(g, &xs, n - 1).unwrap();
        for w in 0..ts.level(n - 1).len() {
            let mut word = vec![letter];
            word.extend(arboreal::oracle::decode(2, n - 1, w));
            let mut want = vec![g.image(x, letter)];
            want.extend(ts.image(&arboreal::oracle::decode(2, n - 1, w)));
            ensure!(tx.image(&word) == want, "section action fails");
        }
    }
    Ok(())
}

fn criterion_6(stats: &mut Stats) -> Check {
    let caps = SearchCaps::default();
    for seed in 0..200u64 {
        let system = random_bounded(seed, 4);
        let mut g = Group::new(system.alphabet);
        let syms = g.load(&system).map_err(|e| e.to_string())?;
        stats.systems += 1;
        let x = syms[0].clone();
        let y = syms[syms.len() - 1].clone();
        let xy = g.multiply(&x, &y);
        laws(&mut g, &x, &y)?;
        laws(&mut g, &xy, &x)?;

        // orders
        for z in [&x, &y, &xy] {
            if let OrderResult::Finite(m) = order(&mut g, z, CAP) {
                let zm = g.power(z, m as i64);
                ensure!(g.is_trivial(&zm).is_equal(), "seed {seed}: z^{m} != e");
                let t = truncated_order(&mut g, z, 10).unwrap();
                ensure!(t == m, "seed {seed}: order {m}, truncated order {t} at depth 10");
            }
        }

        // conjugate pairs built from a known conjugator, and unrelated pairs
        let b = g.conjugate(&xy, &y);
        for (p, q) in [(&xy, &b), (&x, &y)] {
            let d = conjugate_in_aut(&mut g, p, q, CAP).map_err(|e| e.to_string())?;
            let same = orbit_tree_code(&mut g, p, 8).unwrap() == orbit_tree_code(&mut g, q, 8).unwrap();
            if d.is_conjugate() {
                stats.conjugate_pairs += 1;
                ensure!(same, "seed {seed}: Conjugate verdict with different orbit-tree codes");
            } else if d.is_not_conjugate() && same {
                stats.not_conjugate_same_code += 1;
            }
            shipped(&mut g, &d, p, q)?;
            for d in [
                conjugate_in_fsg(&mut g, p, q, CAP).map_err(|e| e.to_string())?,
                conjugate_in_finitary(&mut g, p, q, CAP).map_err(|e| e.to_string())?,
                conjugate_in_pol0_cyclic(&mut g, p, q, caps).map_err(|e| e.to_string())?,
            ] {
                shipped(&mut g, &d, p, q)?;
            }
        }
        ensure!(
            conjugate_in_aut(&mut g, &xy, &b, CAP).unwrap().is_conjugate(),
            "seed {seed}: constructed conjugate pair rejected"
        );

        // self-conjugacy
        for z in [&x, &xy] {
            let decisions = [
                conjugate_in_aut(&mut g, z, z, CAP),
                conjugate_in_fsg(&mut g, z, z, CAP),
                conjugate_in_finitary(&mut g, z, z, CAP),
                conjugate_in_pol0_cyclic(&mut g, z, z, caps),
                conjugate_in_pol_inf(&mut g, z, z, caps),
                conjugate_in_aut_simultaneous(&mut g, &[z.clone()], &[z.clone()], CAP),
            ];
            for d in decisions {
                let d = d.map_err(|e| e.to_string())?;
                ensure!(d.is_conjugate(), "seed {seed}: (z, z) gave {d}");
                shipped(&mut g, &d, z, z)?;
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Check {
    for seed in 0..50u64 {
        let system = random_bounded(1000 + seed, 4);
        let mut g = Group::new(system.alphabet);
        let syms = g.load(&system).map_err(|e| e.to_string())?;
        let a = g.multiply(&syms[syms.len() - 1], &syms[0]);
        let ai = g.inverse(&a);
        let d = conjugate_in_fsg(&mut g, &a, &ai, CAP).map_err(|e| e.to_string())?;
        let h = d.conjugator().ok_or_else(|| format!("seed {seed}: {d}"))?.clone();
        ensure!(h.exact == Some(true), "seed {seed}: conjugator not checked exactly");
        ensure!(verify_conjugator(&mut g, &h.element, &a, &ai, 10).unwrap(), "seed {seed}: verification fails");
    }
    Ok(())
}

fn main() {
    let mut stats = Stats {
        systems: 0,
        conjugate_pairs: 0,
        not_conjugate_same_code: 0,
    };
    let results = [
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6(&mut stats)),
        (7, criterion_7()),
    ];
    let mut failed = Vec::new();
    for (n, r) in &results {
        match r {
            Ok(()) => println!("criterion {n}: pass"),
            Err(why) => {
                println!("criterion {n}: fail ({why})");
                failed.push(*n);
            }
        }
    }
    println!(
        "random systems: {}, conjugate pairs: {}, not-conjugate pairs with equal orbit-tree codes: {}",
        stats.systems, stats.conjugate_pairs, stats.not_conjugate_same_code
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
