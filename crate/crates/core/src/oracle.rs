//! Ground truth from finite quotients: exact actions on `X^n` for small `n`.
//!
//! Words of length `k` are coded as integers in base `d`, first letter most
//! significant. Every check here is brute force and independent of the
//! graph-based procedures.

use std::collections::HashMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::order::lcm;
use crate::perm::{Alphabet, Letter, Perm};
use crate::system::{Definition, FRSystem, SymbolPower, Word};

/// Largest level size `d^n` accepted by truncation.
pub const LEVEL_CAP: usize = 1 << 14;

/// The action of an automorphism on the levels `X^0 .. X^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncatedAut {
    degree: usize,
    levels: Vec<Vec<u32>>,
}

impl TruncatedAut {
    pub fn identity(degree: usize, depth: usize) -> Self {
        TruncatedAut {
            degree,
            levels: (0..=depth)
                .map(|k| (0..degree.pow(k as u32) as u32).collect())
                .collect(),
        }
    }

    /// `(s_0, .., s_(d-1)) perm` with sections truncated one level shallower.
    pub fn from_wreath(perm: &Perm, sections: &[&TruncatedAut]) -> Self {
        let d = perm.degree();
        let depth = sections.iter().map(|s| s.depth()).min().unwrap_or(0) + 1;
        let mut levels = vec![vec![0u32]];
        for k in 1..=depth {
            let below = d.pow(k as u32 - 1);
            let mut level = vec![0u32; below * d];
            for x in 0..d {
                let px = perm.apply(x);
                let sub = &sections[x].levels[k - 1];
                for w in 0..below {
                    level[x * below + w] = (px * below) as u32 + sub[w];
                }
            }
            levels.push(level);
        }
        TruncatedAut {
            degree: d,
            levels,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Images of the coded words of length `k`.
    pub fn level(&self, k: usize) -> &[u32] {
        &self.levels[k]
    }

    pub fn image(&self, v: &[Letter]) -> Vec<Letter> {
        let code = encode(self.degree, v);
        decode(self.degree, v.len(), self.levels[v.len()][code] as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.iter().enumerate().all(|(i, &x)| i as u32 == x))
    }

    /// Lcm of the cycle lengths on level `k`.
    pub fn level_order(&self, k: usize) -> u128 {
        cycles(&self.levels[k])
            .iter()
            .fold(1u128, |acc, c| lcm(acc, c.len() as u128))
    }
}

pub fn encode(d: usize, v: &[Letter]) -> usize {
    v.iter().fold(0, |acc, &x| acc * d + x)
}

pub fn decode(d: usize, len: usize, mut code: usize) -> Vec<Letter> {
    let mut v = vec![0; len];
    for i in (0..len).rev() {
        v[i] = code % d;
        code /= d;
    }
    v
}

fn cycles(images: &[u32]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; images.len()];
    let mut out = Vec::new();
    for s in 0..images.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            c.push(x);
            x = images[x] as usize;
        }
        out.push(c);
    }
    out
}

pub(crate) fn check_depth(d: usize, n: usize) -> Result<()> {
    match d.checked_pow(n as u32) {
        Some(size) if size <= LEVEL_CAP => Ok(()),
        _ => Err(Error::DepthTooLarge { depth: n, degree: d }),
    }
}

/// Memoized truncations of many elements of one group.
#[derive(Default)]
pub struct Truncator {
    memo: HashMap<(Element, usize), Rc<TruncatedAut>>,
}

impl Truncator {
    pub fn new() -> Self {
        Truncator::default()
    }

    pub fn truncate(&mut self, group: &mut Group, g: &Element, n: usize) -> Result<Rc<TruncatedAut>> {
        check_depth(group.degree(), n)?;
        Ok(self.go(group, g, n))
    }

    fn go(&mut self, group: &mut Group, g: &Element, n: usize) -> Rc<TruncatedAut> {
        let g = match group.known_key(g) {
            Some(s) => Element::from_state(s),
            None => g.clone(),
        };
        if let Some(t) = self.memo.get(&(g.clone(), n)) {
            return t.clone();
        }
        let d = group.degree();
        let t = if n == 0 || g.is_trivial_word() {
            TruncatedAut::identity(d, n)
        } else {
            let perm = group.root_perm(&g);
            let subs: Vec<Rc<TruncatedAut>> = (0..d)
                .map(|x| {
                    let s = group.section(&g, x);
                    self.go(group, &s, n - 1)
                })
                .collect();
            let refs: Vec<&TruncatedAut> = subs.iter().map(|s| s.as_ref()).collect();
            TruncatedAut::from_wreath(&perm, &refs)
        };
        let t = Rc::new(t);
        self.memo.insert((g, n), t.clone());
        t
    }
}

/// The exact action of `g` on all words of length at most `n`.
pub fn truncate(group: &mut Group, g: &Element, n: usize) -> Result<TruncatedAut> {
    Ok((*Truncator::new().truncate(group, g, n)?).clone())
}

/// Canonical code of the orbit tree of `g` on `X^0 .. X^n`: every orbit is
/// written as `(size child child ..)` with the child codes sorted.
pub fn orbit_tree_code(group: &mut Group, g: &Element, n: usize) -> Result<String> {
    let t = truncate(group, g, n)?;
    Ok(orbit_tree_code_of(&t))
}

pub fn orbit_tree_code_of(t: &TruncatedAut) -> String {
    let d = t.degree();
    let n = t.depth();
    // codes of the orbits on the deepest level, then upwards
    let mut orbit_of: Vec<usize> = Vec::new();
    let mut codes: Vec<String> = Vec::new();
    for k in (0..=n).rev() {
        let cs = cycles(t.level(k));
        let mut owner = vec![0usize; t.level(k).len()];
        for (i, c) in cs.iter().enumerate() {
            for &w in c {
                owner[w] = i;
            }
        }
        let mut next_codes = Vec::with_capacity(cs.len());
        for c in &cs {
            let mut children: Vec<&str> = Vec::new();
            if k < n {
                let mut seen = Vec::new();
                for &w in c {
                    for x in 0..d {
                        let o = orbit_of[w * d + x];
                        if !seen.contains(&o) {
                            seen.push(o);
                        }
                    }
                }
                children = seen.iter().map(|&o| codes[o].as_str()).collect();
                children.sort_unstable();
            }
            let mut s = format!("({}", c.len());
            for ch in children {
                s.push(' ');
                s.push_str(ch);
            }
            s.push(')');
            next_codes.push(s);
        }
        orbit_of = owner;
        codes = next_codes;
    }
    codes.pop().unwrap_or_default()
}

/// Order of the permutation induced on `X^n`.
pub fn truncated_order(group: &mut Group, g: &Element, n: usize) -> Result<u128> {
    Ok(truncate(group, g, n)?.level_order(n))
}

/// Whether `h^-1 a h` and `b` act identically on all words of length at most `n`.
pub fn verify_conjugator(
    group: &mut Group,
    h: &Element,
    a: &Element,
    b: &Element,
    n: usize,
) -> Result<bool> {
    let mut tr = Truncator::new();
    verify_with(&mut tr, group, h, a, b, n)
}

pub(crate) fn verify_with(
    tr: &mut Truncator,
    group: &mut Group,
    h: &Element,
    a: &Element,
    b: &Element,
    n: usize,
) -> Result<bool> {
    let th = tr.truncate(group, h, n)?;
    let ta = tr.truncate(group, a, n)?;
    let tb = tr.truncate(group, b, n)?;
    // h^-1 a h = b  iff  (w^a)^h = (w^h)^b for every word w
    let (lh, la, lb) = (th.level(n), ta.level(n), tb.level(n));
    Ok((0..lh.len()).all(|w| lh[la[w] as usize] == lb[lh[w] as usize]))
}

/// A random bounded system over the binary alphabet with at most `budget`
/// symbols. Circuits are disjoint simple cycles; every section leaving a
/// circuit is finitary.
pub fn random_bounded(seed: u64, budget: usize) -> FRSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2;
    let n = rng.gen_range(1..=budget.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    // the first `finitary` symbols are finitary, the rest split into circuits
    let finitary = rng.gen_range(0..=n);
    let mut circuits: Vec<Vec<usize>> = Vec::new();
    let mut i = finitary;
    while i < n {
        let len = rng.gen_range(1..=n - i);
        circuits.push((i..i + len).collect());
        i += len;
    }
    let mut sections: Vec<Vec<Option<usize>>> = vec![vec![None; d]; n];
    let pick_finitary = |rng: &mut ChaCha8Rng, below: usize| -> Option<usize> {
        if below == 0 || rng.gen_bool(0.4) {
            None
        } else {
            Some(rng.gen_range(0..below))
        }
    };
    for (i, row) in sections.iter_mut().enumerate().take(finitary) {
        for s in row.iter_mut() {
            *s = pick_finitary(&mut rng, i);
        }
    }
    for c in &circuits {
        for (j, &s) in c.iter().enumerate() {
            let next = c[(j + 1) % c.len()];
            let on = rng.gen_range(0..d);
            for x in 0..d {
                sections[s][x] = if x == on {
                    Some(next)
                } else {
                    pick_finitary(&mut rng, finitary)
                };
            }
        }
    }
    let definitions = (0..n)
        .map(|i| Definition {
            name: names[i].clone(),
            perm: if rng.gen_bool(0.6) {
                Perm::swap01(d)
            } else {
                Perm::identity(d)
            },
            sections: sections[i]
                .iter()
                .map(|s| match s {
                    None => Word::default(),
                    Some(j) => Word(vec![SymbolPower {
                        name: names[*j].clone(),
                        inverse: false,
                    }]),
                })
                .collect(),
        })
        .collect();
    FRSystem {
        alphabet: Alphabet::new(d).expect("binary alphabet"),
        definitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coding() {
        assert_eq!(encode(2, &[1, 0, 1]), 5);
        assert_eq!(decode(2, 3, 5), vec![1, 0, 1]);
        assert_eq!(decode(3, 2, 0), vec![0, 0]);
    }

    #[test]
    fn odometer_levels() {
        let mut g = Group::parse("alphabet 2\na = (e, a) [1 0]\ns = (e, e) [1 0]").unwrap();
        let a = g.element("a").unwrap();
        let s = g.element("s").unwrap();
        let t = truncate(&mut g, &a, 3).unwrap();
        assert_eq!(t.level_order(3), 8);
        assert_eq!(t.image(&[0, 0, 0]), vec![1, 0, 0]);
        assert!(truncate(&mut g, &Element::identity(), 5).unwrap().is_identity());
        let ts = truncate(&mut g, &s, 2).unwrap();
        assert_eq!(ts.level(2), &[2, 3, 0, 1]);
        assert!(truncate(&mut g, &a, 15).is_err());
    }

    #[test]
    fn orbit_codes() {
        let mut g = Group::parse("alphabet 2\na = (e, a) [1 0]").unwrap();
        let a = g.element("a").unwrap();
        assert_eq!(orbit_tree_code(&mut g, &a, 1).unwrap(), "(1 (2))");
        assert_eq!(
            orbit_tree_code(&mut g, &Element::identity(), 1).unwrap(),
            "(1 (1) (1))"
        );
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(random_bounded(7, 4), random_bounded(7, 4));
        for seed in 0..20 {
            random_bounded(seed, 4).validate().unwrap();
        }
    }
}
