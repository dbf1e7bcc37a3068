//! Conjugacy in the full automorphism group: the conjugator graph, basic
//! conjugators, simultaneous conjugacy and truncated canonical representatives.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::classify::{machine_class, nucleus_of, orbit_signalizer, polynomial_degree, ActivityClass, NucleusReport, OrbitSignalizer};
use crate::error::{Error, Result};
use crate::group::{Element, Group, SymId};
use crate::oracle::{check_depth, verify_with, TruncatedAut, Truncator, LEVEL_CAP};
use crate::perm::{Letter, Perm};
use crate::system::FRSystem;
use crate::universe::StateId;

/// Largest alphabet for which permutation conjugators are enumerated.
pub const PERM_CAP: usize = 8;

/// Default depth of the truncated conjugator check.
pub const VERIFY_DEPTH: usize = 10;

/// State budget when expanding a synthesized conjugator to a finite machine.
pub const EXPANSION_CAP: usize = 20_000;

/// All `pi` with `pi^-1 p pi = q`, in lexicographic order of image tables.
pub fn perm_conjugators(p: &Perm, q: &Perm) -> Result<Vec<Perm>> {
    let d = p.degree();
    if d > PERM_CAP {
        return Err(Error::DegreeTooLarge { degree: d, cap: PERM_CAP });
    }
    if p.cycle_type() != q.cycle_type() {
        return Ok(Vec::new());
    }
    // x^(pi^-1 p pi) = x^q  iff  (z^p)^pi = (z^pi)^q with x = z^pi
    Ok(Perm::all(d)
        .filter(|pi| (0..d).all(|z| pi.apply(p.apply(z)) == q.apply(pi.apply(z))))
        .collect())
}

fn perm_conjugators_all(pairs: &[(Perm, Perm)], d: usize) -> Result<Vec<Perm>> {
    if d > PERM_CAP {
        return Err(Error::DegreeTooLarge { degree: d, cap: PERM_CAP });
    }
    Ok(Perm::all(d)
        .filter(|pi| {
            pairs
                .iter()
                .all(|(p, q)| (0..d).all(|z| pi.apply(p.apply(z)) == q.apply(pi.apply(z))))
        })
        .collect())
}

/// A vertex `(c, d, pi)` of the conjugator graph, by indices into the orbit-signalizers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub c: usize,
    pub d: usize,
    pub pi: Perm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConjEdge {
    pub source: usize,
    pub letter: Letter,
    pub target: usize,
}

/// The pruned conjugator graph `Psi(a, b)`.
#[derive(Debug, Clone)]
pub struct ConjGraph {
    pub os_a: OrbitSignalizer,
    pub os_b: OrbitSignalizer,
    /// Surviving vertices, in construction order.
    pub vertices: Vec<Triple>,
    pub edges: Vec<ConjEdge>,
    /// Surviving vertices of the form `(a, b, pi)`.
    pub roots: Vec<usize>,
    /// Number of vertices before pruning.
    pub unpruned: usize,
}

impl ConjGraph {
    /// Surviving permutations for a pair, in lexicographic order.
    pub fn surviving(&self, c: usize, d: usize) -> Vec<Perm> {
        let mut out: Vec<Perm> = self
            .vertices
            .iter()
            .filter(|t| t.c == c && t.d == d)
            .map(|t| t.pi.clone())
            .collect();
        out.sort();
        out
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Removes vertices lacking an out-edge for one of their required letters,
/// until nothing changes. Returns the survivors.
fn prune(required: &[Vec<Letter>], edges: &[ConjEdge]) -> Vec<bool> {
    let n = required.len();
    let mut alive = vec![true; n];
    let mut by_source: Vec<Vec<&ConjEdge>> = vec![Vec::new(); n];
    for e in edges {
        by_source[e.source].push(e);
    }
    loop {
        let mut changed = false;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            let ok = required[v].iter().all(|&x| {
                by_source[v]
                    .iter()
                    .any(|e| e.letter == x && alive[e.target])
            });
            if !ok {
                alive[v] = false;
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

fn compact(
    vertices: Vec<Triple>,
    edges: Vec<ConjEdge>,
    alive: &[bool],
) -> (Vec<Triple>, Vec<ConjEdge>, Vec<usize>) {
    let mut index = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for (i, t) in vertices.into_iter().enumerate() {
        if alive[i] {
            index[i] = kept.len();
            kept.push(t);
        }
    }
    let edges = edges
        .into_iter()
        .filter(|e| alive[e.source] && alive[e.target])
        .map(|e| ConjEdge {
            source: index[e.source],
            letter: e.letter,
            target: index[e.target],
        })
        .collect();
    (kept, edges, index)
}

/// Builds `Psi(a, b)` over all of `OS(a) x OS(b)`. `Ok(None)` when an
/// orbit-signalizer exceeds `cap`.
pub fn conj_graph(group: &mut Group, a: &Element, b: &Element, cap: usize) -> Result<Option<ConjGraph>> {
    let os_a = orbit_signalizer(group, a, cap);
    let os_b = orbit_signalizer(group, b, cap);
    if !os_a.is_complete() || !os_b.is_complete() {
        return Ok(None);
    }
    let perms_a: Vec<Perm> = os_a.elements.iter().map(|e| group.root_perm(e)).collect();
    let perms_b: Vec<Perm> = os_b.elements.iter().map(|e| group.root_perm(e)).collect();

    let mut vertices = Vec::new();
    let mut index: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for c in 0..os_a.len() {
        for d in 0..os_b.len() {
            for pi in perm_conjugators(&perms_a[c], &perms_b[d])? {
                index.entry((c, d)).or_default().push(vertices.len());
                vertices.push(Triple { c, d, pi });
            }
        }
    }
    let mut edges = Vec::new();
    let mut required = Vec::with_capacity(vertices.len());
    for (v, t) in vertices.iter().enumerate() {
        let mut reps = Vec::new();
        for orbit in perms_a[t.c].orbits() {
            let x = orbit[0];
            reps.push(x);
            let c1 = os_a.power_section(t.c, x);
            let d1 = os_b.power_section(t.d, t.pi.apply(x));
            for &w in index.get(&(c1, d1)).map(Vec::as_slice).unwrap_or(&[]) {
                edges.push(ConjEdge {
                    source: v,
                    letter: x,
                    target: w,
                });
            }
        }
        required.push(reps);
    }
    let unpruned = vertices.len();
    let alive = prune(&required, &edges);
    let (vertices, edges, _) = compact(vertices, edges, &alive);
    let roots = (0..vertices.len())
        .filter(|&v| vertices[v].c == 0 && vertices[v].d == 0)
        .collect();
    Ok(Some(ConjGraph {
        os_a,
        os_b,
        vertices,
        edges,
        roots,
        unpruned,
    }))
}

/// How the root permutation of a basic conjugator is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Least,
    Greatest,
}

/// A conjugator given by a functionally recursive system inside the group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugatorFR {
    pub root: SymId,
    /// Defining symbols, root first.
    pub symbols: Vec<SymId>,
}

impl ConjugatorFR {
    pub fn element(&self, group: &Group) -> Element {
        group.symbol(self.root)
    }

    pub fn system(&self, group: &Group) -> FRSystem {
        group.system_of(&self.symbols)
    }
}

/// The basic conjugator of `graph` for the given root policy: every other
/// pair takes its least surviving permutation.
pub fn basic_conjugator(group: &mut Group, graph: &ConjGraph, policy: Policy) -> Result<ConjugatorFR> {
    let mut roots: Vec<Perm> = graph.roots.iter().map(|&v| graph.vertices[v].pi.clone()).collect();
    roots.sort();
    let pi = match policy {
        Policy::Least => roots.first(),
        Policy::Greatest => roots.last(),
    }
    .cloned()
    .ok_or(Error::NoRoot)?;
    let mut choice = BTreeMap::new();
    choice.insert((0, 0), pi);
    Ok(basic_conjugator_with(group, graph, &choice))
}

/// Every basic conjugator: one per assignment of surviving permutations to
/// the pairs reachable from the root, up to `limit` of them.
pub fn all_basic_conjugators(group: &mut Group, graph: &ConjGraph, limit: usize) -> Vec<ConjugatorFR> {
    // pairs reachable from the root under some choice
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    if !graph.roots.is_empty() {
        seen.insert((0, 0));
        queue.push_back((0usize, 0usize));
    }
    while let Some(p) = queue.pop_front() {
        pairs.push(p);
        for e in &graph.edges {
            let s = &graph.vertices[e.source];
            if (s.c, s.d) == p {
                let t = &graph.vertices[e.target];
                if seen.insert((t.c, t.d)) {
                    queue.push_back((t.c, t.d));
                }
            }
        }
    }
    let options: Vec<Vec<Perm>> = pairs.iter().map(|&(c, d)| graph.surviving(c, d)).collect();
    let mut out = Vec::new();
    let mut systems: Vec<Vec<(SymId, Perm)>> = Vec::new();
    let mut digits = vec![0usize; pairs.len()];
    'outer: loop {
        if out.len() >= limit {
            break;
        }
        let choice: BTreeMap<(usize, usize), Perm> = pairs
            .iter()
            .zip(&digits)
            .zip(&options)
            .map(|((&p, &i), o)| (p, o[i].clone()))
            .collect();
        // skip assignments that differ only on pairs the choice never reaches
        let used = reached_pairs(graph, &choice);
        let signature: Vec<(SymId, Perm)> = pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| used.contains(p))
            .map(|(i, p)| (i as SymId, choice[p].clone()))
            .collect();
        if !systems.contains(&signature) {
            systems.push(signature);
            out.push(basic_conjugator_with(group, graph, &choice));
        }
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < options[k].len() {
                continue 'outer;
            }
            digits[k] = 0;
        }
        break;
    }
    out
}

fn reached_pairs(graph: &ConjGraph, choice: &BTreeMap<(usize, usize), Perm>) -> Vec<(usize, usize)> {
    let mut out = vec![(0usize, 0usize)];
    let mut k = 0;
    while k < out.len() {
        let (c, d) = out[k];
        k += 1;
        let pi = &choice[&(c, d)];
        for e in &graph.edges {
            let s = &graph.vertices[e.source];
            let t = &graph.vertices[e.target];
            if s.c == c && s.d == d && &s.pi == pi && !out.contains(&(t.c, t.d)) {
                out.push((t.c, t.d));
            }
        }
    }
    out
}

/// Builds the basic conjugator for the given permutation choices; pairs
/// without a choice take their least surviving permutation.
pub fn basic_conjugator_with(
    group: &mut Group,
    graph: &ConjGraph,
    choice: &BTreeMap<(usize, usize), Perm>,
) -> ConjugatorFR {
    let mut chosen: HashMap<(usize, usize), (SymId, Perm)> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    let fix = |group: &mut Group,
                   chosen: &mut HashMap<(usize, usize), (SymId, Perm)>,
                   c: usize,
                   d: usize,
                   order: &mut Vec<(usize, usize)>|
     -> SymId {
        if let Some((s, _)) = chosen.get(&(c, d)) {
            return *s;
        }
        let pi = choice
            .get(&(c, d))
            .cloned()
            .unwrap_or_else(|| graph.surviving(c, d)[0].clone());
        let s = group.reserve_symbol("h", pi.clone());
        chosen.insert((c, d), (s, pi));
        order.push((c, d));
        s
    };
    let root = fix(group, &mut chosen, 0, 0, &mut order);
    let mut symbols = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let (c, d) = order[k];
        k += 1;
        let sym = chosen[&(c, d)].0;
        let pi = chosen[&(c, d)].1.clone();
        symbols.push(sym);
        let ce = graph.os_a.elements[c].clone();
        let de = graph.os_b.elements[d].clone();
        let mut sections = vec![Element::identity(); group.degree()];
        for orbit in group.root_perm(&ce).orbits() {
            let x = orbit[0];
            let c1 = graph.os_a.power_section(c, x);
            let d1 = graph.os_b.power_section(d, pi.apply(x));
            let h1sym = fix(group, &mut chosen, c1, d1, &mut order);
            let h1 = group.symbol(h1sym);
            let px = pi.apply(x);
            let b_orbit = group.orbit(&de, px);
            // running products c^i|_x and d^i|_(x^pi)
            let mut ci = Element::identity();
            let mut di = Element::identity();
            for i in 0..orbit.len() {
                if i == 0 {
                    sections[x] = h1.clone();
                } else {
                    let cinv = group.inverse(&ci);
                    sections[orbit[i]] = group.product(&[cinv, h1.clone(), di.clone()]);
                }
                let cs = group.section(&ce, orbit[i]);
                let ds = group.section(&de, b_orbit[i]);
                ci = group.multiply(&ci, &cs);
                di = group.multiply(&di, &ds);
            }
        }
        group.set_sections(sym, sections);
    }
    ConjugatorFR { root, symbols }
}

/// A synthesized and checked conjugator.
#[derive(Debug, Clone)]
pub struct Conjugator {
    pub element: Element,
    /// Symbols of the defining system, root first.
    pub symbols: Vec<SymId>,
    /// Depth to which `h^-1 a h = b` was checked on the tree.
    pub verified_depth: usize,
    /// Outcome of the exact word-problem check, when `h` expanded to a finite machine.
    pub exact: Option<bool>,
    /// Size of the minimal machine of `h`, when it expanded.
    pub machine_states: Option<usize>,
    /// Activity class of `h`, when it expanded.
    pub class: Option<ActivityClass>,
}

impl Conjugator {
    pub fn system(&self, group: &Group) -> FRSystem {
        group.system_of(&self.symbols)
    }
}

/// Outcome of a conjugacy decision.
#[derive(Debug, Clone)]
pub enum ConjDecision {
    Conjugate(Conjugator),
    NotConjugate(String),
    Unknown(String),
}

impl ConjDecision {
    pub fn is_conjugate(&self) -> bool {
        matches!(self, ConjDecision::Conjugate(_))
    }

    pub fn is_not_conjugate(&self) -> bool {
        matches!(self, ConjDecision::NotConjugate(_))
    }

    pub fn conjugator(&self) -> Option<&Conjugator> {
        match self {
            ConjDecision::Conjugate(h) => Some(h),
            _ => None,
        }
    }
}

impl fmt::Display for ConjDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjDecision::Conjugate(_) => write!(f, "conjugate"),
            ConjDecision::NotConjugate(why) => write!(f, "not conjugate ({why})"),
            ConjDecision::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

/// The largest depth not above `requested` whose level fits the truncation cap.
pub fn clamp_depth(d: usize, requested: usize) -> usize {
    let mut n = 0;
    while n < requested && d.checked_pow(n as u32 + 1).is_some_and(|s| s <= LEVEL_CAP) {
        n += 1;
    }
    n
}

/// Checks `h^-1 a_i h = b_i` on the tree to `depth`, then exactly when `h`
/// expands. `None` when the truncated check fails.
pub fn certify(
    group: &mut Group,
    element: Element,
    symbols: Vec<SymId>,
    pairs: &[(Element, Element)],
    depth: usize,
) -> Result<Option<Conjugator>> {
    let depth = clamp_depth(group.degree(), depth);
    check_depth(group.degree(), depth)?;
    let mut tr = Truncator::new();
    for (a, b) in pairs {
        if !verify_with(&mut tr, group, &element, a, b, depth)? {
            return Ok(None);
        }
    }
    let mut exact = None;
    let mut machine_states = None;
    let mut class = None;
    if let Some(s) = group.key_with_cap(&element, EXPANSION_CAP) {
        let machine = group.machine_of_state(s);
        machine_states = Some(machine.len());
        class = Some(machine_class(&machine));
        let mut ok = true;
        for (a, b) in pairs {
            let conj = group.conjugate(a, &element);
            if !group.equal(&conj, b).is_equal() {
                ok = false;
            }
        }
        if !ok {
            return Ok(None);
        }
        exact = Some(true);
    }
    Ok(Some(Conjugator {
        element,
        symbols,
        verified_depth: depth,
        exact,
        machine_states,
        class,
    }))
}

/// Decides conjugacy in `Aut(T)` for elements with finite orbit-signalizers
/// and synthesizes the least basic conjugator.
pub fn conjugate_in_aut(group: &mut Group, a: &Element, b: &Element, cap: usize) -> Result<ConjDecision> {
    let Some(graph) = conj_graph(group, a, b, cap)? else {
        return Ok(ConjDecision::Unknown(format!(
            "orbit-signalizer exceeded {cap} elements"
        )));
    };
    decide_from_graph(group, &graph, a, b)
}

pub(crate) fn decide_from_graph(
    group: &mut Group,
    graph: &ConjGraph,
    a: &Element,
    b: &Element,
) -> Result<ConjDecision> {
    if graph.roots.is_empty() {
        let mut why = "no vertex (a, b, pi) survives in the conjugator graph".to_string();
        if !graph.is_empty() {
            why.push_str(&format!(
                "; {} other vertices survive, so the graph is nonempty but rootless",
                graph.vertices.len()
            ));
        }
        return Ok(ConjDecision::NotConjugate(why));
    }
    let h = basic_conjugator(group, graph, Policy::Least)?;
    let element = h.element(group);
    match certify(group, element, h.symbols, &[(a.clone(), b.clone())], VERIFY_DEPTH)? {
        Some(c) => Ok(ConjDecision::Conjugate(c)),
        None => Ok(ConjDecision::Unknown(
            "synthesized conjugator failed verification".into(),
        )),
    }
}

/// Conjugacy in the group of finite-state automorphisms.
///
/// Bounded inputs and inputs generating a verified contracting group are
/// decided through `Aut(T)`, where every basic conjugator is finite-state.
/// Otherwise the only evidence reported is the orbit-signalizer obstruction:
/// conjugate finite-state elements have orbit-signalizers of equal
/// finiteness.
pub fn conjugate_in_fsg(group: &mut Group, a: &Element, b: &Element, cap: usize) -> Result<ConjDecision> {
    let bounded = polynomial_degree(group, a).is_bounded() && polynomial_degree(group, b).is_bounded();
    let contracting = !bounded
        && matches!(
            nucleus_of(group, &[a.clone(), b.clone()], 512, 64),
            NucleusReport::Contracting(_)
        );
    if bounded || contracting {
        let decision = conjugate_in_aut(group, a, b, cap)?;
        return Ok(match decision {
            ConjDecision::Conjugate(c) if c.exact != Some(true) => ConjDecision::Unknown(format!(
                "conjugate in Aut(T), but the conjugator did not expand within {EXPANSION_CAP} states"
            )),
            other => other,
        });
    }
    let os_a = orbit_signalizer(group, a, cap);
    let os_b = orbit_signalizer(group, b, cap);
    Ok(match (os_a.is_complete(), os_b.is_complete()) {
        (true, false) | (false, true) => {
            let (done, open) = if os_a.is_complete() { ("a", "b") } else { ("b", "a") };
            ConjDecision::Unknown(format!(
                "OS({done}) is finite while OS({open}) exceeds {cap} elements; \
                 if OS({open}) is infinite they are not conjugate in FSG"
            ))
        }
        (true, true) => match conjugate_in_aut(group, a, b, cap)? {
            ConjDecision::Conjugate(c) if c.exact == Some(true) => ConjDecision::Conjugate(c),
            ConjDecision::NotConjugate(why) => ConjDecision::NotConjugate(why),
            _ => ConjDecision::Unknown("conjugate in Aut(T); finite-state conjugator not found".into()),
        },
        (false, false) => ConjDecision::Unknown(format!("both orbit-signalizers exceed {cap} elements")),
    })
}

// ----------------------------------------------------------------------
// simultaneous conjugacy
// ----------------------------------------------------------------------

type Tuple = Vec<(StateId, StateId)>;

struct TupleInfo {
    /// Orbit representatives of the group generated by the root permutations.
    reps: Vec<Letter>,
    /// Transversal words: `x^(t_y) = y` on the left side, the same word on the right.
    transversal: Vec<(Element, Element)>,
    /// Representative of the orbit of every letter.
    rep_of: Vec<Letter>,
}

fn tuple_info(group: &mut Group, tuple: &Tuple) -> TupleInfo {
    let d = group.degree();
    let gens: Vec<(Element, Element)> = tuple
        .iter()
        .map(|&(c, e)| (Element::from_state(c), Element::from_state(e)))
        .collect();
    let perms: Vec<Perm> = gens.iter().map(|(c, _)| group.root_perm(c)).collect();
    let mut transversal = vec![(Element::identity(), Element::identity()); d];
    let mut rep_of = vec![usize::MAX; d];
    let mut reps = Vec::new();
    for x in 0..d {
        if rep_of[x] != usize::MAX {
            continue;
        }
        reps.push(x);
        rep_of[x] = x;
        let mut queue = VecDeque::from([x]);
        while let Some(y) = queue.pop_front() {
            for (i, p) in perms.iter().enumerate() {
                let z = p.apply(y);
                if rep_of[z] == usize::MAX {
                    rep_of[z] = x;
                    let (ty, tb) = transversal[y].clone();
                    let l = group.multiply(&ty, &gens[i].0);
                    let r = group.multiply(&tb, &gens[i].1);
                    transversal[z] = (l, r);
                    queue.push_back(z);
                }
            }
        }
    }
    TupleInfo {
        reps,
        transversal,
        rep_of,
    }
}

/// Successor problem at representative `x`: sections of the Schreier
/// generators of the stabilizer of `x`.
fn tuple_successor(
    group: &mut Group,
    tuple: &Tuple,
    info: &TupleInfo,
    pi: &Perm,
    x: Letter,
) -> Option<Tuple> {
    let d = group.degree();
    let mut out: Tuple = Vec::new();
    for y in (0..d).filter(|&y| info.rep_of[y] == x) {
        for &(c, e) in tuple {
            let ce = Element::from_state(c);
            let ee = Element::from_state(e);
            let z = group.root_perm(&ce).apply(y);
            let (ty, tby) = info.transversal[y].clone();
            let (tz, tbz) = info.transversal[z].clone();
            let tzi = group.inverse(&tz);
            let tbzi = group.inverse(&tbz);
            let s = group.product(&[ty, ce, tzi]);
            let sb = group.product(&[tby, ee, tbzi]);
            let l = group.section(&s, x);
            let r = group.section(&sb, pi.apply(x));
            let pair = (group.key(&l)?, group.key(&r)?);
            if pair != (0, 0) {
                out.push(pair);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Some(out)
}

/// Decides whether one `h` conjugates every `a_i` to `b_i`, and synthesizes it.
pub fn conjugate_in_aut_simultaneous(
    group: &mut Group,
    as_: &[Element],
    bs: &[Element],
    cap: usize,
) -> Result<ConjDecision> {
    if as_.len() != bs.len() {
        return Err(Error::LengthMismatch(as_.len(), bs.len()));
    }
    let d = group.degree();
    let mut root: Tuple = Vec::new();
    for (a, b) in as_.iter().zip(bs) {
        let (Some(ka), Some(kb)) = (group.key(a), group.key(b)) else {
            return Ok(ConjDecision::Unknown("inputs must be finite-state".into()));
        };
        if (ka, kb) != (0, 0) {
            root.push((ka, kb));
        }
    }
    root.sort_unstable();
    root.dedup();

    let mut tuples: Vec<Tuple> = vec![root.clone()];
    let mut tuple_index: HashMap<Tuple, usize> = HashMap::from([(root, 0)]);
    let mut infos: Vec<TupleInfo> = Vec::new();
    let mut vertices: Vec<(usize, Perm)> = Vec::new();
    // (vertex, letter, successor tuple)
    let mut pending: Vec<(usize, Letter, usize)> = Vec::new();
    let mut k = 0;
    while k < tuples.len() {
        if tuples.len() > cap {
            return Ok(ConjDecision::Unknown(format!(
                "more than {cap} simultaneous subproblems"
            )));
        }
        let tuple = tuples[k].clone();
        let info = tuple_info(group, &tuple);
        let perm_pairs: Vec<(Perm, Perm)> = tuple
            .iter()
            .map(|&(c, e)| (group.state_perm(c).clone(), group.state_perm(e).clone()))
            .collect();
        for pi in perm_conjugators_all(&perm_pairs, d)? {
            let v = vertices.len();
            vertices.push((k, pi.clone()));
            for &x in &info.reps {
                let Some(next) = tuple_successor(group, &tuple, &info, &pi, x) else {
                    return Ok(ConjDecision::Unknown("section is not finite-state".into()));
                };
                let t = match tuple_index.get(&next) {
                    Some(&t) => t,
                    None => {
                        tuple_index.insert(next.clone(), tuples.len());
                        tuples.push(next);
                        tuples.len() - 1
                    }
                };
                pending.push((v, x, t));
            }
        }
        infos.push(info);
        k += 1;
    }
    let mut by_tuple: Vec<Vec<usize>> = vec![Vec::new(); tuples.len()];
    for (v, (t, _)) in vertices.iter().enumerate() {
        by_tuple[*t].push(v);
    }
    let edges: Vec<ConjEdge> = pending
        .iter()
        .flat_map(|&(v, x, t)| {
            by_tuple[t].iter().map(move |&w| ConjEdge {
                source: v,
                letter: x,
                target: w,
            })
        })
        .collect();
    let required: Vec<Vec<Letter>> = vertices.iter().map(|(t, _)| infos[*t].reps.clone()).collect();
    let alive = prune(&required, &edges);
    let Some(root_vertex) = by_tuple[0].iter().copied().find(|&v| alive[v]) else {
        return Ok(ConjDecision::NotConjugate(
            "no root vertex survives in the simultaneous conjugator graph".into(),
        ));
    };

    // synthesis: one symbol per reached tuple with its least surviving permutation
    let mut chosen: HashMap<usize, (SymId, Perm)> = HashMap::new();
    let mut order = Vec::new();
    let least = |t: usize| -> Perm {
        by_tuple[t]
            .iter()
            .filter(|&&v| alive[v])
            .map(|&v| vertices[v].1.clone())
            .min()
            .expect("successor tuples of surviving vertices survive")
    };
    let root_pi = vertices[root_vertex].1.clone();
    let s = group.reserve_symbol("h", root_pi.clone());
    chosen.insert(0, (s, root_pi));
    order.push(0usize);
    let mut symbols = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let t = order[i];
        i += 1;
        let (sym, pi) = chosen[&t].clone();
        symbols.push(sym);
        let tuple = tuples[t].clone();
        let mut sections = vec![Element::identity(); d];
        for &x in &infos[t].reps.clone() {
            let next = tuple_successor(group, &tuple, &infos[t], &pi, x).expect("computed before");
            let tn = tuple_index[&next];
            let hsym = match chosen.get(&tn) {
                Some((s, _)) => *s,
                None => {
                    let p = least(tn);
                    let s = group.reserve_symbol("h", p.clone());
                    chosen.insert(tn, (s, p));
                    order.push(tn);
                    s
                }
            };
            let h1 = group.symbol(hsym);
            for y in (0..d).filter(|&y| infos[t].rep_of[y] == x) {
                // h|_y = (t_y|_x)^-1 h|_x t'_y|_(x^pi)
                let (ty, tby) = infos[t].transversal[y].clone();
                let l = group.section(&ty, x);
                let r = group.section(&tby, pi.apply(x));
                let li = group.inverse(&l);
                sections[y] = group.product(&[li, h1.clone(), r]);
            }
        }
        group.set_sections(sym, sections);
    }
    let element = group.symbol(symbols[0]);
    let pairs: Vec<(Element, Element)> = as_.iter().cloned().zip(bs.iter().cloned()).collect();
    match certify(group, element, symbols, &pairs, VERIFY_DEPTH)? {
        Some(c) => Ok(ConjDecision::Conjugate(c)),
        None => Ok(ConjDecision::Unknown(
            "synthesized conjugator failed verification".into(),
        )),
    }
}

// ----------------------------------------------------------------------
// canonical representatives
// ----------------------------------------------------------------------

/// The left-oriented representative of the conjugacy class of `a`, truncated
/// to `depth`. Cycles of the root permutation are laid out by increasing
/// length; cycles of equal length are ordered by their truncated
/// sub-representatives. Each cycle carries the whole product `a^m|_x` on its
/// last letter.
pub fn canonical_representative(group: &mut Group, a: &Element, depth: usize) -> Result<TruncatedAut> {
    check_depth(group.degree(), depth)?;
    let mut memo = HashMap::new();
    Ok(representative(group, a, depth, &mut memo))
}

fn representative(
    group: &mut Group,
    a: &Element,
    n: usize,
    memo: &mut HashMap<(Element, usize), TruncatedAut>,
) -> TruncatedAut {
    let d = group.degree();
    let a = match group.known_key(a) {
        Some(s) => Element::from_state(s),
        None => a.clone(),
    };
    if n == 0 || a.is_trivial_word() {
        return TruncatedAut::identity(d, n);
    }
    if let Some(t) = memo.get(&(a.clone(), n)) {
        return t.clone();
    }
    let perm = group.root_perm(&a);
    let mut cycles: Vec<(usize, TruncatedAut)> = Vec::new();
    for orbit in perm.orbits() {
        let (m, sec) = group.orbit_power_section(&a, orbit[0]);
        cycles.push((m, representative(group, &sec, n - 1, memo)));
    }
    cycles.sort();
    let mut images = vec![0usize; d];
    let identity = TruncatedAut::identity(d, n - 1);
    let mut sections: Vec<&TruncatedAut> = vec![&identity; d];
    let mut start = 0;
    for (m, sub) in &cycles {
        for j in 0..*m {
            images[start + j] = start + (j + 1) % m;
        }
        sections[start + m - 1] = sub;
        start += m;
    }
    let perm = Perm::from_images(images).expect("cycles partition the alphabet");
    let t = TruncatedAut::from_wreath(&perm, &sections);
    memo.insert((a, n), t.clone());
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_conjugators() {
        let s = Perm::swap01(2);
        let e = Perm::identity(2);
        assert_eq!(perm_conjugators(&s, &s).unwrap(), vec![e.clone(), s.clone()]);
        assert!(perm_conjugators(&e, &s).unwrap().is_empty());
        let p = Perm::from_images(vec![1, 2, 0]).unwrap();
        let q = Perm::from_images(vec![2, 0, 1]).unwrap();
        let all = perm_conjugators(&p, &q).unwrap();
        assert_eq!(all.len(), 3);
        for pi in &all {
            assert_eq!(p.conjugate_by(pi), q);
        }
        assert!(perm_conjugators(&Perm::identity(9), &Perm::identity(9)).is_err());
    }

    #[test]
    fn depth_clamp() {
        assert_eq!(clamp_depth(2, 10), 10);
        assert_eq!(clamp_depth(2, 20), 14);
        assert_eq!(clamp_depth(3, 10), 8);
    }
}
