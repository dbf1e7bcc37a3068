//! Activity growth, cycle-structure classification, circuits,
//! orbit-signalizers and nuclei.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::Result;
use crate::graph::{on_cycle, scc};
use crate::group::{Element, Group, Machine};
use crate::perm::Letter;
use crate::universe::{StateId, TRIVIAL};

/// Position of an automorphism in the activity hierarchy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActivityClass {
    /// Acts trivially below the given level.
    Finitary(usize),
    /// Activity grows like `k^n`; `Polynomial(0)` is bounded.
    Polynomial(usize),
    Exponential,
    Unknown(String),
}

impl ActivityClass {
    /// Finitary or of polynomial degree zero.
    pub fn is_bounded(&self) -> bool {
        matches!(self, ActivityClass::Finitary(_) | ActivityClass::Polynomial(0))
    }
}

impl fmt::Display for ActivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivityClass::Finitary(k) => write!(f, "finitary depth {k}"),
            ActivityClass::Polynomial(0) => write!(f, "bounded"),
            ActivityClass::Polynomial(n) => write!(f, "polynomial degree {n}"),
            ActivityClass::Exponential => write!(f, "exponential"),
            ActivityClass::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

/// `theta_0 .. theta_k`: the number of level-`j` states with nontrivial root permutation.
pub fn activity(group: &mut Group, g: &Element, k: usize) -> Result<Vec<u128>> {
    let m = group.machine(g)?;
    let mut v = vec![0u128; m.len()];
    v[0] = 1;
    let mut out = Vec::with_capacity(k + 1);
    for level in 0..=k {
        out.push(
            (0..m.len())
                .filter(|&s| m.is_active(s))
                .fold(0u128, |acc, s| acc.saturating_add(v[s])),
        );
        if level == k {
            break;
        }
        let mut next = vec![0u128; m.len()];
        for (s, &count) in v.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &t in &m.transitions[s] {
                next[t] = next[t].saturating_add(count);
            }
        }
        v = next;
    }
    Ok(out)
}

fn adjacency(m: &Machine, skip_trivial: bool) -> Vec<Vec<usize>> {
    (0..m.len())
        .map(|s| {
            if skip_trivial && Some(s) == m.trivial {
                return Vec::new();
            }
            m.transitions[s]
                .iter()
                .copied()
                .filter(|&t| !(skip_trivial && Some(t) == m.trivial))
                .collect()
        })
        .collect()
}

fn depth_of_acyclic(m: &Machine, adj: &[Vec<usize>], comp: &[usize]) -> usize {
    // components come sinks first, so a pass in component order is a topological sweep
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by_key(|&s| comp[s]);
    let mut depth = vec![0usize; m.len()];
    for s in order {
        if Some(s) == m.trivial {
            continue;
        }
        depth[s] = 1 + adj[s].iter().map(|&t| depth[t]).max().unwrap_or(0);
    }
    depth[0]
}

/// The least `k` with every level-`k` section trivial, or `None` when some
/// nontrivial state lies on a cycle.
pub fn finitary_depth(group: &mut Group, g: &Element) -> Result<Option<usize>> {
    let m = group.machine(g)?;
    Ok(machine_finitary_depth(&m))
}

pub(crate) fn machine_finitary_depth(m: &Machine) -> Option<usize> {
    if Some(0) == m.trivial {
        return Some(0);
    }
    let adj = adjacency(m, true);
    let (comp, _) = scc(&adj);
    if (0..m.len()).any(|s| on_cycle(&adj, &comp, s)) {
        return None;
    }
    Some(depth_of_acyclic(m, &adj, &comp))
}

/// Classification by the cycle structure of the minimal machine.
pub fn polynomial_degree(group: &mut Group, g: &Element) -> ActivityClass {
    match group.machine(g) {
        Ok(m) => machine_class(&m),
        Err(e) => ActivityClass::Unknown(e.to_string()),
    }
}

pub(crate) fn machine_class(m: &Machine) -> ActivityClass {
    if Some(0) == m.trivial {
        return ActivityClass::Finitary(0);
    }
    let adj = adjacency(m, true);
    let (comp, count) = scc(&adj);
    let mut cyclic = vec![false; count];
    for s in 0..m.len() {
        if on_cycle(&adj, &comp, s) {
            cyclic[comp[s]] = true;
        }
    }
    if !cyclic.iter().any(|&c| c) {
        return ActivityClass::Finitary(depth_of_acyclic(m, &adj, &comp));
    }
    for s in 0..m.len() {
        if cyclic[comp[s]] && adj[s].iter().filter(|&&t| comp[t] == comp[s]).count() != 1 {
            return ActivityClass::Exponential;
        }
    }
    // longest chain of cycles, over the condensation (sinks first)
    let mut best = vec![0usize; count];
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by_key(|&s| comp[s]);
    for s in order {
        let c = comp[s];
        let below = adj[s]
            .iter()
            .filter(|&&t| comp[t] != c)
            .map(|&t| best[comp[t]])
            .max()
            .unwrap_or(0);
        best[c] = best[c].max(below + usize::from(cyclic[c]));
    }
    ActivityClass::Polynomial(best[comp[0]] - 1)
}

/// The shortest, then lexicographically least, nonempty `v` with `g|_v = g`.
pub fn circuit_word(group: &mut Group, g: &Element, max_len: usize) -> Result<Option<Vec<Letter>>> {
    let m = group.machine(g)?;
    let mut parent: HashMap<usize, (usize, Letter)> = HashMap::new();
    let mut depth: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    // virtual source usize::MAX stands for the root before reading a letter
    for (x, &t) in m.transitions[0].iter().enumerate() {
        if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(t) {
            e.insert((usize::MAX, x));
            depth.insert(t, 1);
            queue.push_back(t);
        }
    }
    while let Some(s) = queue.pop_front() {
        if s == 0 {
            break;
        }
        if depth[&s] >= max_len {
            continue;
        }
        for (x, &t) in m.transitions[s].iter().enumerate() {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(t) {
                e.insert((s, x));
                depth.insert(t, depth[&s] + 1);
                queue.push_back(t);
            }
        }
    }
    if !parent.contains_key(&0) || Some(0) == m.trivial {
        return Ok(None);
    }
    let mut word = Vec::new();
    let mut s = 0;
    loop {
        let (p, x) = parent[&s];
        word.push(x);
        if p == usize::MAX {
            break;
        }
        s = p;
    }
    word.reverse();
    Ok(Some(word))
}

/// Completion status of a closure computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    ExceededCap,
}

/// An edge `b --m--> b^m|_x` of the orbit-signalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OsEdge {
    pub source: usize,
    pub label: usize,
    pub target: usize,
    pub letter: Letter,
}

/// `OS(a) = { a^m|_v : m = |orbit of v under a| }`, with the edges taken at
/// least orbit representatives.
#[derive(Debug, Clone)]
pub struct OrbitSignalizer {
    pub elements: Vec<Element>,
    pub edges: Vec<OsEdge>,
    pub status: Status,
    /// For every element and every letter `y`: index of `b^m|_y`, `m` the orbit size of `y`.
    sections: Vec<Vec<usize>>,
}

impl OrbitSignalizer {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }

    /// Index of `b^m|_y` for the element with index `i`.
    pub fn power_section(&self, i: usize, y: Letter) -> usize {
        self.sections[i][y]
    }

    /// Out-edges of one element, by representative letter.
    pub fn edges_from(&self, i: usize) -> impl Iterator<Item = &OsEdge> {
        self.edges.iter().filter(move |e| e.source == i)
    }

    /// Index of an element equal to `g`.
    pub fn position(&self, group: &mut Group, g: &Element) -> Option<usize> {
        (0..self.len()).find(|&i| group.equal(&self.elements[i], g).is_equal())
    }
}

/// Membership index keyed by canonical state, with a scan by the word
/// problem for elements that do not expand.
pub(crate) struct ElementSet {
    pub items: Vec<Element>,
    by_key: HashMap<StateId, usize>,
    unkeyed: Vec<usize>,
}

impl ElementSet {
    pub fn new() -> Self {
        ElementSet {
            items: Vec::new(),
            by_key: HashMap::new(),
            unkeyed: Vec::new(),
        }
    }

    /// Index of `g`, inserting it when new. The flag is true for a new element.
    pub fn insert(&mut self, group: &mut Group, g: Element) -> (usize, bool) {
        match group.key(&g) {
            Some(k) => {
                if let Some(&i) = self.by_key.get(&k) {
                    return (i, false);
                }
                for &i in &self.unkeyed {
                    if group.equal(&self.items[i], &g).is_equal() {
                        return (i, false);
                    }
                }
                let i = self.items.len();
                self.items.push(Element::from_state(k));
                self.by_key.insert(k, i);
                (i, true)
            }
            None => {
                for i in 0..self.items.len() {
                    if group.equal(&self.items[i], &g).is_equal() {
                        return (i, false);
                    }
                }
                let i = self.items.len();
                self.items.push(g);
                self.unkeyed.push(i);
                (i, true)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }
}

/// Breadth-first closure of `{g}` under `b -> b^m|_y`.
pub fn orbit_signalizer(group: &mut Group, g: &Element, cap: usize) -> OrbitSignalizer {
    let d = group.degree();
    let mut set = ElementSet::new();
    set.insert(group, g.clone());
    let mut sections: Vec<Vec<usize>> = Vec::new();
    let mut edges = Vec::new();
    let mut status = Status::Complete;
    let mut k = 0;
    while k < set.len() {
        let b = set.items[k].clone();
        let perm = group.root_perm(&b);
        let mut row = vec![usize::MAX; d];
        for orbit in perm.orbits() {
            let m = orbit.len();
            let (_, first) = group.orbit_power_section(&b, orbit[0]);
            let mut current = first;
            for (j, &y) in orbit.iter().enumerate() {
                if j > 0 {
                    // b^m|_(y b) = (b|_y)^-1 b^m|_y b|_y
                    let prev = orbit[j - 1];
                    let s = group.section(&b, prev);
                    current = group.conjugate(&current, &s);
                }
                let (i, new) = set.insert(group, current.clone());
                if new && set.len() > cap {
                    status = Status::ExceededCap;
                }
                row[y] = i;
                if j == 0 {
                    edges.push(OsEdge {
                        source: k,
                        label: m,
                        target: i,
                        letter: y,
                    });
                }
            }
        }
        sections.push(row);
        k += 1;
        if status == Status::ExceededCap {
            break;
        }
    }
    edges.sort_by_key(|e| (e.source, e.letter));
    OrbitSignalizer {
        elements: set.items,
        edges,
        status,
        sections,
    }
}

/// Result of the contraction semi-decision.
#[derive(Debug, Clone)]
pub enum NucleusReport {
    Contracting(Vec<Element>),
    Unknown(String),
}

/// Nucleus of the self-similar group generated by the states of `g`.
pub fn nucleus(group: &mut Group, g: &Element, size_cap: usize, depth_cap: usize) -> NucleusReport {
    nucleus_of(group, std::slice::from_ref(g), size_cap, depth_cap)
}

/// Nucleus of the self-similar group generated by the states of `gens`.
pub fn nucleus_of(
    group: &mut Group,
    gens: &[Element],
    size_cap: usize,
    depth_cap: usize,
) -> NucleusReport {
    let mut roots = Vec::new();
    for g in gens {
        let Some(s) = group.key(g) else {
            return NucleusReport::Unknown(format!("`{}` is not finite-state", group.display(g)));
        };
        let inv = group.inverse(&Element::from_state(s));
        roots.push(s);
        roots.push(group.key(&inv).expect("inverse of a finite-state element"));
    }
    let mut members: Vec<StateId> = Vec::new();
    let mut seen: HashSet<StateId> = HashSet::new();
    for &r in &roots {
        add_cycle_states(group, r, &mut members, &mut seen);
    }
    if members.is_empty() {
        add_cycle_states(group, TRIVIAL, &mut members, &mut seen);
    }
    let mut done = 0;
    while done < members.len() {
        let n = members.len();
        for i in 0..n {
            for j in 0..n {
                if i < done && j < done {
                    continue;
                }
                let p = Element::from_state(members[i]);
                let q = Element::from_state(members[j]);
                let pq = group.multiply(&p, &q);
                let s = group.key(&pq).expect("product of finite-state elements");
                add_cycle_states(group, s, &mut members, &mut seen);
                if members.len() > size_cap {
                    return NucleusReport::Unknown(format!(
                        "nucleus candidate exceeded {size_cap} elements"
                    ));
                }
            }
        }
        done = n;
    }
    // every product of two members must sink into the set within depth_cap levels
    for &p in &members {
        for &q in &members {
            let pq = group.multiply(&Element::from_state(p), &Element::from_state(q));
            let s = group.key(&pq).expect("product of finite-state elements");
            if !absorbed(group, s, &seen, depth_cap) {
                return NucleusReport::Unknown(format!(
                    "products not absorbed within depth {depth_cap}"
                ));
            }
        }
    }
    members.sort_by_key(|&s| (s != TRIVIAL, group.machine_of_state(s).len(), s));
    NucleusReport::Contracting(members.into_iter().map(Element::from_state).collect())
}

fn add_cycle_states(group: &Group, root: StateId, members: &mut Vec<StateId>, seen: &mut HashSet<StateId>) {
    let m = group.machine_of_state(root);
    let adj = adjacency(&m, false);
    let (comp, _) = scc(&adj);
    let mut stack: Vec<usize> = (0..m.len()).filter(|&s| on_cycle(&adj, &comp, s)).collect();
    while let Some(s) = stack.pop() {
        if seen.insert(m.states[s]) {
            members.push(m.states[s]);
            stack.extend(adj[s].iter().copied());
        }
    }
}

fn absorbed(group: &Group, s: StateId, set: &HashSet<StateId>, depth_cap: usize) -> bool {
    let d = group.degree();
    let mut level: HashSet<StateId> = HashSet::from([s]);
    for _ in 0..=depth_cap {
        if level.iter().all(|t| set.contains(t)) {
            return true;
        }
        level = level
            .iter()
            .flat_map(|&t| (0..d).map(move |x| (t, x)))
            .map(|(t, x)| group.state_section(t, x))
            .collect();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(text: &str) -> Group {
        Group::parse(text).unwrap()
    }

    #[test]
    fn activity_sequences() {
        let mut g = group("alphabet 2\na = (e, a) [1 0]\nb = (a, b)");
        let a = g.element("a").unwrap();
        let b = g.element("b").unwrap();
        assert_eq!(activity(&mut g, &a, 5).unwrap(), vec![1; 6]);
        assert_eq!(activity(&mut g, &b, 5).unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(activity(&mut g, &Element::identity(), 3).unwrap(), vec![0; 4]);
    }

    #[test]
    fn depth_and_class() {
        let mut g = group("alphabet 2\ns = (e, e) [1 0]\nt = (s, e)\na = (e, a) [1 0]");
        let s = g.element("s").unwrap();
        let t = g.element("t").unwrap();
        let a = g.element("a").unwrap();
        assert_eq!(finitary_depth(&mut g, &Element::identity()).unwrap(), Some(0));
        assert_eq!(finitary_depth(&mut g, &s).unwrap(), Some(1));
        assert_eq!(finitary_depth(&mut g, &t).unwrap(), Some(2));
        assert_eq!(finitary_depth(&mut g, &a).unwrap(), None);
        assert_eq!(polynomial_degree(&mut g, &t), ActivityClass::Finitary(2));
        assert_eq!(polynomial_degree(&mut g, &a), ActivityClass::Polynomial(0));
    }

    #[test]
    fn circuits() {
        let mut g = group("alphabet 2\na = (e, a) [1 0]\ns = (e, e) [1 0]\nc = (c, s)");
        let a = g.element("a").unwrap();
        let s = g.element("s").unwrap();
        let c = g.element("c").unwrap();
        assert_eq!(circuit_word(&mut g, &a, 8).unwrap(), Some(vec![1]));
        assert_eq!(circuit_word(&mut g, &c, 8).unwrap(), Some(vec![0]));
        assert_eq!(circuit_word(&mut g, &s, 8).unwrap(), None);
        assert_eq!(circuit_word(&mut g, &Element::identity(), 8).unwrap(), None);
    }
}
