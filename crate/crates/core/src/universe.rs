//! A growing minimal Mealy machine holding every finite-state automorphism
//! seen so far, one state per automorphism.
//!
//! New states arrive as small pending machines whose transitions may point
//! back into the store. Interning merges bisimilar states and looks up the
//! canonical code of each new class, so that two state ids are equal exactly
//! when the automorphisms are equal.

use std::collections::{HashMap, VecDeque};

use crate::perm::{Letter, Perm};

pub type StateId = u32;

/// The trivial automorphism; always present.
pub const TRIVIAL: StateId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Target {
    Old(StateId),
    New(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Pending {
    pub perm: Perm,
    pub succ: Vec<Target>,
}

#[derive(Debug)]
pub(crate) struct Universe {
    degree: usize,
    perms: Vec<Perm>,
    trans: Vec<StateId>,
    codes: HashMap<Vec<u32>, StateId>,
    product_memo: HashMap<(StateId, StateId), StateId>,
    inverse_memo: HashMap<StateId, StateId>,
    provenance: Vec<(StateId, Vec<(StateId, bool)>)>,
}

impl Universe {
    pub fn new(degree: usize) -> Self {
        let mut u = Universe {
            degree,
            perms: vec![Perm::identity(degree)],
            trans: vec![TRIVIAL; degree],
            codes: HashMap::new(),
            product_memo: HashMap::new(),
            inverse_memo: HashMap::new(),
            provenance: Vec::new(),
        };
        let code = u.code_in_store(TRIVIAL);
        u.codes.insert(code, TRIVIAL);
        u.inverse_memo.insert(TRIVIAL, TRIVIAL);
        u
    }

    /// States produced by products and inverses since the last call, each
    /// with the factors (inverted or not) it was built from.
    pub fn take_provenance(&mut self) -> Vec<(StateId, Vec<(StateId, bool)>)> {
        std::mem::take(&mut self.provenance)
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    #[inline]
    pub fn perm(&self, s: StateId) -> &Perm {
        &self.perms[s as usize]
    }

    #[inline]
    pub fn section(&self, s: StateId, x: Letter) -> StateId {
        self.trans[s as usize * self.degree + x]
    }

    /// States reachable from `s` (including `s`), breadth first in letter order.
    pub fn reachable(&self, s: StateId) -> Vec<StateId> {
        let mut seen = HashMap::new();
        let mut order = vec![s];
        seen.insert(s, ());
        let mut i = 0;
        while i < order.len() {
            let t = order[i];
            i += 1;
            for x in 0..self.degree {
                let n = self.section(t, x);
                if seen.insert(n, ()).is_none() {
                    order.push(n);
                }
            }
        }
        order
    }

    fn code_in_store(&self, s: StateId) -> Vec<u32> {
        let order = self.reachable(s);
        let index: HashMap<StateId, u32> = order
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i as u32))
            .collect();
        let mut code = Vec::with_capacity(order.len() * 2 * self.degree);
        for &t in &order {
            code.extend(self.perm(t).images().map(|i| i as u32));
            for x in 0..self.degree {
                code.push(index[&self.section(t, x)]);
            }
        }
        code
    }

    /// Adds the pending states, merging each with an equal stored state when
    /// one exists. Returns the store id of every pending state.
    pub fn intern(&mut self, pending: &[Pending]) -> Vec<StateId> {
        let n = pending.len();
        let d = self.degree;

        // Stored states reachable from the pending machine. They are pairwise
        // inequivalent and closed under sections.
        let mut old_index: HashMap<StateId, usize> = HashMap::new();
        let mut old: Vec<StateId> = Vec::new();
        let mut queue = VecDeque::new();
        for p in pending {
            for t in &p.succ {
                if let Target::Old(s) = *t {
                    if let std::collections::hash_map::Entry::Vacant(e) = old_index.entry(s) {
                        e.insert(n + old.len());
                        old.push(s);
                        queue.push_back(s);
                    }
                }
            }
        }
        while let Some(s) = queue.pop_front() {
            for x in 0..d {
                let t = self.section(s, x);
                if let std::collections::hash_map::Entry::Vacant(e) = old_index.entry(t) {
                    e.insert(n + old.len());
                    old.push(t);
                    queue.push_back(t);
                }
            }
        }

        let total = n + old.len();
        let mut succ = vec![0usize; total * d];
        let mut perms: Vec<Perm> = Vec::with_capacity(total);
        for (i, p) in pending.iter().enumerate() {
            perms.push(p.perm.clone());
            for (x, t) in p.succ.iter().enumerate() {
                succ[i * d + x] = match *t {
                    Target::Old(s) => old_index[&s],
                    Target::New(j) => j,
                };
            }
        }
        for (k, &s) in old.iter().enumerate() {
            perms.push(self.perms[s as usize].clone());
            for x in 0..d {
                succ[(n + k) * d + x] = old_index[&self.section(s, x)];
            }
        }

        // Moore partition refinement.
        let mut class = vec![0usize; total];
        let mut count;
        {
            let mut by_perm: HashMap<&Perm, usize> = HashMap::new();
            for (i, p) in perms.iter().enumerate() {
                let next = by_perm.len();
                class[i] = *by_perm.entry(p).or_insert(next);
            }
            count = by_perm.len();
        }
        loop {
            let mut by_sig: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next_class = vec![0usize; total];
            for i in 0..total {
                let mut sig = Vec::with_capacity(d + 1);
                sig.push(class[i]);
                sig.extend((0..d).map(|x| class[succ[i * d + x]]));
                let next = by_sig.len();
                next_class[i] = *by_sig.entry(sig).or_insert(next);
            }
            let new_count = by_sig.len();
            class = next_class;
            if new_count == count {
                break;
            }
            count = new_count;
        }

        let mut rep = vec![usize::MAX; count];
        let mut class_id: Vec<Option<StateId>> = vec![None; count];
        for i in 0..total {
            if rep[class[i]] == usize::MAX {
                rep[class[i]] = i;
            }
            if i >= n {
                class_id[class[i]] = Some(old[i - n]);
            }
        }
        let class_succ = |c: usize, x: Letter| class[succ[rep[c] * d + x]];

        // Classes without a stored member: look up or allocate by canonical code.
        let mut fresh: Vec<(usize, Vec<u32>)> = Vec::new();
        for c in 0..count {
            if class_id[c].is_some() {
                continue;
            }
            let mut order = vec![c];
            let mut index: HashMap<usize, u32> = HashMap::new();
            index.insert(c, 0);
            let mut k = 0;
            while k < order.len() {
                let cc = order[k];
                k += 1;
                for x in 0..d {
                    let t = class_succ(cc, x);
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry(t) {
                        e.insert(order.len() as u32);
                        order.push(t);
                    }
                }
            }
            let mut code = Vec::with_capacity(order.len() * 2 * d);
            for &cc in &order {
                code.extend(perms[rep[cc]].images().map(|i| i as u32));
                for x in 0..d {
                    code.push(index[&class_succ(cc, x)]);
                }
            }
            match self.codes.get(&code) {
                Some(&s) => class_id[c] = Some(s),
                None => fresh.push((c, code)),
            }
        }
        for (c, _) in &fresh {
            let id = self.perms.len() as StateId;
            self.perms.push(perms[rep[*c]].clone());
            self.trans.extend(std::iter::repeat_n(TRIVIAL, d));
            class_id[*c] = Some(id);
        }
        for (c, code) in fresh {
            let id = class_id[c].unwrap();
            for x in 0..d {
                self.trans[id as usize * d + x] = class_id[class_succ(c, x)].unwrap();
            }
            self.codes.insert(code, id);
        }
        (0..n).map(|i| class_id[class[i]].unwrap()).collect()
    }

    pub fn wreath(&mut self, perm: Perm, sections: &[StateId]) -> StateId {
        let pending = Pending {
            perm,
            succ: sections.iter().map(|&s| Target::Old(s)).collect(),
        };
        self.intern(&[pending])[0]
    }

    pub fn product(&mut self, p: StateId, q: StateId) -> StateId {
        if p == TRIVIAL {
            return q;
        }
        if q == TRIVIAL {
            return p;
        }
        if let Some(&r) = self.product_memo.get(&(p, q)) {
            return r;
        }
        let d = self.degree;
        let mut index: HashMap<(StateId, StateId), usize> = HashMap::new();
        let mut pairs = vec![(p, q)];
        index.insert((p, q), 0);
        let mut pending: Vec<Pending> = Vec::new();
        let mut k = 0;
        while k < pairs.len() {
            let (s, t) = pairs[k];
            k += 1;
            let ps = self.perm(s);
            let perm = ps.then(self.perm(t));
            let mut succ = Vec::with_capacity(d);
            for x in 0..d {
                let s1 = self.section(s, x);
                let t1 = self.section(t, ps.apply(x));
                let target = if s1 == TRIVIAL {
                    Target::Old(t1)
                } else if t1 == TRIVIAL {
                    Target::Old(s1)
                } else if let Some(&r) = self.product_memo.get(&(s1, t1)) {
                    Target::Old(r)
                } else if let Some(&j) = index.get(&(s1, t1)) {
                    Target::New(j)
                } else {
                    index.insert((s1, t1), pairs.len());
                    pairs.push((s1, t1));
                    Target::New(pairs.len() - 1)
                };
                succ.push(target);
            }
            pending.push(Pending { perm, succ });
        }
        let ids = self.intern(&pending);
        for (pair, id) in pairs.into_iter().zip(ids) {
            self.provenance.push((id, vec![(pair.0, false), (pair.1, false)]));
            self.product_memo.insert(pair, id);
        }
        self.product_memo[&(p, q)]
    }

    pub fn inverse(&mut self, p: StateId) -> StateId {
        if let Some(&r) = self.inverse_memo.get(&p) {
            return r;
        }
        let d = self.degree;
        let mut index: HashMap<StateId, usize> = HashMap::new();
        let mut states = vec![p];
        index.insert(p, 0);
        let mut pending = Vec::new();
        let mut k = 0;
        while k < states.len() {
            let s = states[k];
            k += 1;
            let inv = self.perm(s).inverse();
            let mut succ = Vec::with_capacity(d);
            for x in 0..d {
                // s^-1 |_x = (s|_{x^(s^-1)})^-1
                let t = self.section(s, inv.apply(x));
                let target = if let Some(&r) = self.inverse_memo.get(&t) {
                    Target::Old(r)
                } else if let Some(&j) = index.get(&t) {
                    Target::New(j)
                } else {
                    index.insert(t, states.len());
                    states.push(t);
                    Target::New(states.len() - 1)
                };
                succ.push(target);
            }
            pending.push(Pending { perm: inv, succ });
        }
        let ids = self.intern(&pending);
        for (s, id) in states.into_iter().zip(ids) {
            self.provenance.push((id, vec![(s, true)]));
            self.inverse_memo.insert(s, id);
            self.inverse_memo.insert(id, s);
        }
        self.inverse_memo[&p]
    }

    pub fn power(&mut self, p: StateId, n: i64) -> StateId {
        let base = if n < 0 { self.inverse(p) } else { p };
        let mut e = n.unsigned_abs();
        let mut acc = TRIVIAL;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.product(acc, sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.product(sq, sq);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adding_machine(u: &mut Universe) -> StateId {
        // a = (e, a) sigma
        u.intern(&[Pending {
            perm: Perm::swap01(2),
            succ: vec![Target::Old(TRIVIAL), Target::New(0)],
        }])[0]
    }

    #[test]
    fn interning_is_canonical() {
        let mut u = Universe::new(2);
        let a = adding_machine(&mut u);
        // the same machine described with a redundant duplicate state
        let again = u.intern(&[
            Pending {
                perm: Perm::swap01(2),
                succ: vec![Target::Old(TRIVIAL), Target::New(1)],
            },
            Pending {
                perm: Perm::swap01(2),
                succ: vec![Target::Old(TRIVIAL), Target::New(0)],
            },
        ]);
        assert_eq!(again, vec![a, a]);
        assert_eq!(u.len(), 2);
        // (e, e) with identity output is the trivial state
        assert_eq!(u.wreath(Perm::identity(2), &[TRIVIAL, TRIVIAL]), TRIVIAL);
    }

    #[test]
    fn group_operations() {
        let mut u = Universe::new(2);
        let a = adding_machine(&mut u);
        let inv = u.inverse(a);
        assert_ne!(inv, a);
        assert_eq!(u.product(a, inv), TRIVIAL);
        assert_eq!(u.product(inv, a), TRIVIAL);
        let a2 = u.product(a, a);
        assert!(u.perm(a2).is_identity());
        // a^2 = (a, a)
        assert_eq!(u.section(a2, 0), a);
        assert_eq!(u.section(a2, 1), a);
        assert_eq!(u.power(a, 2), a2);
        assert_eq!(u.power(a, -1), inv);
        assert_eq!(u.power(a, 0), TRIVIAL);
        let a3 = u.power(a, 3);
        let ai3 = u.power(a, -3);
        assert_eq!(u.product(a3, ai3), TRIVIAL);
    }
}
