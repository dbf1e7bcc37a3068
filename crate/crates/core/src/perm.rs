//! Letters, alphabets and permutations of the first level of the tree.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// A letter of the alphabet `0..degree`.
pub type Letter = usize;

/// The alphabet `X = {0, .., d-1}` of a `d`-ary tree, ordered by the integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    degree: usize,
}

impl Alphabet {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeTooSmall(degree));
        }
        Ok(Alphabet { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn letters(&self) -> std::ops::Range<Letter> {
        0..self.degree
    }

    /// Number of words of length `n`.
    pub fn level_size(&self, n: usize) -> Option<usize> {
        self.degree.checked_pow(n as u32)
    }
}

/// A permutation of the alphabet, stored as its image table.
///
/// Composition follows right actions: `x^(p*q) = (x^p)^q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from its image table, rejecting non-bijections.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &i in &images {
            if i >= d || seen[i] {
                return Err(Error::NotBijective(images.clone()));
            }
            seen[i] = true;
        }
        Ok(Perm {
            images: images.into_iter().map(|i| i as u32).collect(),
        })
    }

    /// Builds a permutation from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[&[Letter]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= degree {
                    return Err(Error::NotBijective(images));
                }
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Perm::from_images(images)
    }

    /// The transposition `(0 1)` of a binary alphabet, or of the first two letters.
    pub fn swap01(degree: usize) -> Self {
        let mut p = Perm::identity(degree);
        p.images.swap(0, 1);
        p
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: Letter) -> Letter {
        self.images[x] as usize
    }

    pub fn images(&self) -> impl Iterator<Item = Letter> + '_ {
        self.images.iter().map(|&i| i as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u32;
        }
        Perm { images }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Self {
        Perm {
            images: self.images.iter().map(|&x| other.images[x as usize]).collect(),
        }
    }

    /// `pi^-1 * self * pi`.
    pub fn conjugate_by(&self, pi: &Perm) -> Self {
        pi.inverse().then(self).then(pi)
    }

    /// Orbits in order of their least element; each orbit lists `x, x^p, x^(p^2), ..`.
    pub fn orbits(&self) -> Vec<Vec<Letter>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for x in 0..self.degree() {
            if seen[x] {
                continue;
            }
            let mut orbit = vec![x];
            seen[x] = true;
            let mut y = self.apply(x);
            while y != x {
                seen[y] = true;
                orbit.push(y);
                y = self.apply(y);
            }
            out.push(orbit);
        }
        out
    }

    /// Size of the orbit of `x`.
    pub fn orbit_len(&self, x: Letter) -> usize {
        let mut n = 1;
        let mut y = self.apply(x);
        while y != x {
            n += 1;
            y = self.apply(y);
        }
        n
    }

    /// Sorted cycle lengths.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.orbits().iter().map(Vec::len).collect();
        t.sort_unstable();
        t
    }

    /// Every permutation of `degree` letters, in lexicographic order of image tables.
    pub fn all(degree: usize) -> impl Iterator<Item = Perm> {
        (0..degree)
            .permutations(degree)
            .map(|images| Perm {
                images: images.into_iter().map(|i| i as u32).collect(),
            })
    }

    /// Renders as `[i_0 i_1 ...]`, the literal syntax of the recursion language.
    pub fn literal(&self) -> String {
        format!("[{}]", self.images.iter().join(" "))
    }

    /// Renders in cycle notation, `()` for the identity.
    pub fn cycle_notation(&self) -> String {
        let cycles: Vec<_> = self.orbits().into_iter().filter(|o| o.len() > 1).collect();
        if cycles.is_empty() {
            return "()".into();
        }
        cycles
            .iter()
            .map(|c| format!("({})", c.iter().join(" ")))
            .collect()
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.literal())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cycle_notation())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijection() {
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::from_images(vec![0, 2]).is_err());
        assert!(Alphabet::new(1).is_err());
    }

    #[test]
    fn right_action_composition() {
        let p = Perm::from_images(vec![1, 2, 0]).unwrap();
        let q = Perm::from_images(vec![1, 0, 2]).unwrap();
        // x^(pq) = (x^p)^q
        let pq = p.then(&q);
        for x in 0..3 {
            assert_eq!(pq.apply(x), q.apply(p.apply(x)));
        }
        assert!(p.then(&p.inverse()).is_identity());
    }

    #[test]
    fn orbits_are_listed_from_least_element() {
        let p = Perm::from_cycles(5, &[&[3, 1], &[2, 4]]).unwrap();
        assert_eq!(p.orbits(), vec![vec![0], vec![1, 3], vec![2, 4]]);
        assert_eq!(p.cycle_type(), vec![1, 2, 2]);
        assert_eq!(p.orbit_len(4), 2);
        assert_eq!(p.cycle_notation(), "(1 3)(2 4)");
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all: Vec<_> = Perm::all(3).collect();
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all[0].is_identity());
    }
}
