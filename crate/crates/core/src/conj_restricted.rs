//! Conjugacy of bounded automorphisms inside the finitary, bounded and
//! polynomial groups: configurations, the finitary fixpoint, the cyclic
//! search for bounded conjugators and the active-state matrix system.

use std::collections::{BTreeMap, HashMap};

use crate::classify::{machine_class, polynomial_degree, ActivityClass};
use crate::conj_aut::{
    certify, conj_graph, ConjDecision, ConjGraph, Conjugator, EXPANSION_CAP, VERIFY_DEPTH,
};
use crate::error::{Error, Result};
use crate::graph::scc;
use crate::group::{Element, Group, SymId};
use crate::perm::{Letter, Perm};
use crate::universe::{StateId, TRIVIAL};

/// A main pair together with its dependency pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub alpha: StateId,
    pub beta: StateId,
    /// Dependency pairs, sorted by canonical key.
    pub dp: Vec<(StateId, StateId)>,
}

impl Configuration {
    pub fn main_pair(&self) -> (Element, Element) {
        (Element::from_state(self.alpha), Element::from_state(self.beta))
    }

    pub fn dependency_pairs(&self) -> Vec<(Element, Element)> {
        self.dp
            .iter()
            .map(|&(c, d)| (Element::from_state(c), Element::from_state(d)))
            .collect()
    }
}

/// One orbit of a configuration under a chosen permutation.
#[derive(Debug, Clone)]
struct Move {
    letter: Letter,
    target: usize,
    /// For every dependency pair of the source, the target pairs it induces
    /// (one per element of the orbit).
    pairs: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
struct Step {
    pi: Perm,
    moves: Vec<Move>,
    theta: Vec<u8>,
}

/// Configurations reachable from one or more roots, with their permutation
/// choices restricted to those surviving in the conjugator graph.
#[derive(Debug, Clone)]
pub struct ConfigTable {
    pub configurations: Vec<Configuration>,
    steps: Vec<Vec<Step>>,
    index: HashMap<Configuration, usize>,
}

struct Context<'a> {
    graph: &'a ConjGraph,
    os_a: HashMap<StateId, usize>,
    os_b: HashMap<StateId, usize>,
}

impl<'a> Context<'a> {
    fn new(graph: &'a ConjGraph) -> Self {
        let key = |e: &Element| e.as_state().expect("bounded elements expand");
        Context {
            graph,
            os_a: graph.os_a.elements.iter().enumerate().map(|(i, e)| (key(e), i)).collect(),
            os_b: graph.os_b.elements.iter().enumerate().map(|(i, e)| (key(e), i)).collect(),
        }
    }

    fn options(&self, alpha: StateId, beta: StateId) -> Vec<Perm> {
        match (self.os_a.get(&alpha), self.os_b.get(&beta)) {
            (Some(&c), Some(&d)) => self.graph.surviving(c, d),
            _ => Vec::new(),
        }
    }
}

fn state(group: &mut Group, g: &Element) -> Result<StateId> {
    group
        .key_with_cap(g, EXPANSION_CAP)
        .ok_or(Error::ExceededCap(EXPANSION_CAP))
}

impl ConfigTable {
    fn new() -> Self {
        ConfigTable {
            configurations: Vec::new(),
            steps: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    /// Surviving permutation choices of a configuration.
    pub fn options(&self, c: usize) -> Vec<Perm> {
        self.steps[c].iter().map(|s| s.pi.clone()).collect()
    }

    fn insert(&mut self, c: Configuration) -> (usize, bool) {
        if let Some(&i) = self.index.get(&c) {
            return (i, false);
        }
        let i = self.configurations.len();
        self.index.insert(c.clone(), i);
        self.configurations.push(c);
        self.steps.push(Vec::new());
        (i, true)
    }

    /// Adds the closure of `root`; returns its index or `None` past `cap`.
    fn explore(&mut self, group: &mut Group, ctx: &Context, root: Configuration, cap: usize) -> Result<Option<usize>> {
        let (r, new) = self.insert(root);
        if !new {
            return Ok(Some(r));
        }
        let mut queue = vec![r];
        while let Some(ci) = queue.pop() {
            let conf = self.configurations[ci].clone();
            let alpha = Element::from_state(conf.alpha);
            let beta = Element::from_state(conf.beta);
            let mut steps = Vec::new();
            for pi in ctx.options(conf.alpha, conf.beta) {
                let mut moves = Vec::new();
                for orbit in group.root_perm(&alpha).orbits() {
                    let x = orbit[0];
                    let px = pi.apply(x);
                    let m = orbit.len();
                    let (_, am) = group.orbit_power_section(&alpha, x);
                    let (_, bm) = group.orbit_power_section(&beta, px);
                    // (alpha^i c)|_x and (beta^i d)|_(x^pi)
                    let mut induced: Vec<Vec<(StateId, StateId)>> = Vec::with_capacity(conf.dp.len());
                    for &(c, d) in &conf.dp {
                        let mut row = Vec::with_capacity(m);
                        for i in 0..m {
                            let ai = group.power(&alpha, i as i64);
                            let bi = group.power(&beta, i as i64);
                            let l = group.multiply(&ai, &Element::from_state(c));
                            let r = group.multiply(&bi, &Element::from_state(d));
                            let l = group.section(&l, x);
                            let r = group.section(&r, px);
                            row.push((state(group, &l)?, state(group, &r)?));
                        }
                        induced.push(row);
                    }
                    let mut dp: Vec<(StateId, StateId)> = induced.iter().flatten().copied().collect();
                    dp.sort_unstable();
                    dp.dedup();
                    let target = Configuration {
                        alpha: state(group, &am)?,
                        beta: state(group, &bm)?,
                        dp: dp.clone(),
                    };
                    let (t, new) = self.insert(target);
                    if new {
                        if self.len() > cap {
                            return Ok(None);
                        }
                        queue.push(t);
                    }
                    let pairs = induced
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|p| dp.binary_search(p).expect("pair in its own set"))
                                .collect()
                        })
                        .collect();
                    moves.push(Move {
                        letter: x,
                        target: t,
                        pairs,
                    });
                }
                let theta = conf
                    .dp
                    .iter()
                    .map(|&(c, d)| {
                        // root permutation of c^-1 h d
                        let p = group
                            .state_perm(c)
                            .inverse()
                            .then(&pi)
                            .then(group.state_perm(d));
                        u8::from(!p.is_identity())
                    })
                    .collect();
                steps.push(Step { pi, moves, theta });
            }
            self.steps[ci] = steps;
        }
        // breadth-first numbering is restored by `reorder`
        Ok(Some(r))
    }
}

fn root_configuration(alpha: StateId, beta: StateId) -> Configuration {
    Configuration {
        alpha,
        beta,
        dp: vec![(TRIVIAL, TRIVIAL)],
    }
}

fn require_bounded(group: &mut Group, g: &Element) -> Result<()> {
    let class = polynomial_degree(group, g);
    if class.is_bounded() {
        Ok(())
    } else {
        Err(Error::NotBounded(format!("`{}` is {class}", group.display(g))))
    }
}

/// Shared state of the restricted deciders for one pair.
pub struct Problem {
    pub a: Element,
    pub b: Element,
    pub graph: ConjGraph,
    pub table: ConfigTable,
    /// Index of the configuration `{(a, b), {(e, e)}}`.
    pub root: usize,
}

impl Problem {
    /// Builds `Psi(a, b)` and the configurations of the pair. `Ok(None)` on cap.
    pub fn new(group: &mut Group, a: &Element, b: &Element, cap: usize) -> Result<Option<Problem>> {
        require_bounded(group, a)?;
        require_bounded(group, b)?;
        let Some(graph) = conj_graph(group, a, b, cap)? else {
            return Ok(None);
        };
        let ka = state(group, a)?;
        let kb = state(group, b)?;
        let mut table = ConfigTable::new();
        let ctx = Context::new(&graph);
        let Some(root) = table.explore(group, &ctx, root_configuration(ka, kb), cap)? else {
            return Ok(None);
        };
        let table = reorder(table, root);
        Ok(Some(Problem {
            a: a.clone(),
            b: b.clone(),
            graph,
            table,
            root: 0,
        }))
    }

    /// Adds the configuration closure of another main pair from `OS(a) x OS(b)`.
    fn explore_pair(&mut self, group: &mut Group, c: usize, d: usize, cap: usize) -> Result<Option<usize>> {
        let alpha = self.graph.os_a.elements[c].as_state().expect("expanded");
        let beta = self.graph.os_b.elements[d].as_state().expect("expanded");
        let ctx = Context::new(&self.graph);
        let mut table = std::mem::replace(&mut self.table, ConfigTable::new());
        let out = table.explore(group, &ctx, root_configuration(alpha, beta), cap);
        self.table = table;
        out
    }
}

/// Renumbers the closure of `root` breadth first, choices in order and
/// orbit representatives ascending.
fn reorder(table: ConfigTable, root: usize) -> ConfigTable {
    let mut order = vec![root];
    let mut pos = HashMap::from([(root, 0usize)]);
    let mut k = 0;
    while k < order.len() {
        let c = order[k];
        k += 1;
        for s in &table.steps[c] {
            for m in &s.moves {
                if let std::collections::hash_map::Entry::Vacant(e) = pos.entry(m.target) {
                    e.insert(order.len());
                    order.push(m.target);
                }
            }
        }
    }
    let mut out = ConfigTable::new();
    for &c in &order {
        out.insert(table.configurations[c].clone());
    }
    out.steps = order
        .iter()
        .map(|&c| {
            table.steps[c]
                .iter()
                .map(|s| Step {
                    pi: s.pi.clone(),
                    theta: s.theta.clone(),
                    moves: s
                        .moves
                        .iter()
                        .map(|m| Move {
                            letter: m.letter,
                            target: pos[&m.target],
                            pairs: m.pairs.clone(),
                        })
                        .collect(),
                })
                .collect()
        })
        .collect();
    out
}

/// The configurations of the pair `(a, b)`, root first. `Ok(None)` on cap.
pub fn configurations(group: &mut Group, a: &Element, b: &Element, cap: usize) -> Result<Option<Vec<Configuration>>> {
    Ok(Problem::new(group, a, b, cap)?.map(|p| p.table.configurations))
}

/// Configurations satisfied by finitary automorphisms.
#[derive(Debug, Clone)]
pub struct FinitarySat {
    /// Least depth of a finitary automorphism satisfying each configuration.
    pub depth: Vec<Option<usize>>,
}

impl FinitarySat {
    pub fn satisfied(&self, c: usize) -> bool {
        self.depth[c].is_some()
    }
}

/// The depth-by-depth fixpoint: depth 0 holds `alpha = beta` and `c = d` for
/// every dependency pair; depth `k + 1` needs a choice sending every orbit
/// into depth at most `k`.
pub fn finitary_satisfiable(table: &ConfigTable) -> FinitarySat {
    let n = table.len();
    let mut depth: Vec<Option<usize>> = table
        .configurations
        .iter()
        .map(|c| (c.alpha == c.beta && c.dp.iter().all(|(x, y)| x == y)).then_some(0))
        .collect();
    let mut k = 0;
    loop {
        let mut added = Vec::new();
        for c in 0..n {
            if depth[c].is_some() {
                continue;
            }
            let ok = table.steps[c]
                .iter()
                .any(|s| s.moves.iter().all(|m| depth[m.target].is_some_and(|t| t <= k)));
            if ok {
                added.push(c);
            }
        }
        if added.is_empty() {
            break;
        }
        k += 1;
        for c in added {
            depth[c] = Some(k);
        }
    }
    FinitarySat { depth }
}

/// A finitary automorphism satisfying configuration `c`, of the least depth.
pub fn finitary_witness(group: &mut Group, table: &ConfigTable, sat: &FinitarySat, c: usize) -> Option<Element> {
    let mut memo = HashMap::new();
    witness(group, table, sat, c, &mut memo)
}

fn witness(
    group: &mut Group,
    table: &ConfigTable,
    sat: &FinitarySat,
    c: usize,
    memo: &mut HashMap<usize, Element>,
) -> Option<Element> {
    let k = sat.depth[c]?;
    if let Some(h) = memo.get(&c) {
        return Some(h.clone());
    }
    let h = if k == 0 {
        Element::identity()
    } else {
        let step = table.steps[c]
            .iter()
            .find(|s| s.moves.iter().all(|m| sat.depth[m.target].is_some_and(|t| t < k)))
            .expect("depth was assigned through some choice");
        let conf = &table.configurations[c];
        let subs: Vec<(Letter, Element)> = step
            .moves
            .iter()
            .map(|m| (m.letter, witness(group, table, sat, m.target, memo).expect("satisfied")))
            .collect();
        let sections = orbit_sections(group, conf.alpha, conf.beta, &step.pi, &subs);
        group.wreath(step.pi.clone(), &sections).expect("finitary sections expand")
    };
    memo.insert(c, h.clone());
    Some(h)
}

/// Sections of a conjugator for `(alpha, beta)` with root `pi`, given its
/// sections at the orbit representatives:
/// `h|_(x alpha^i) = (alpha^i|_x)^-1 h|_x beta^i|_(x^pi)`.
fn orbit_sections(
    group: &mut Group,
    alpha: StateId,
    beta: StateId,
    pi: &Perm,
    reps: &[(Letter, Element)],
) -> Vec<Element> {
    let alpha = Element::from_state(alpha);
    let beta = Element::from_state(beta);
    let mut sections = vec![Element::identity(); group.degree()];
    for (x, hx) in reps {
        let orbit = group.orbit(&alpha, *x);
        let b_orbit = group.orbit(&beta, pi.apply(*x));
        let mut ci = Element::identity();
        let mut di = Element::identity();
        for i in 0..orbit.len() {
            sections[orbit[i]] = if i == 0 {
                hx.clone()
            } else {
                let inv = group.inverse(&ci);
                group.product(&[inv, hx.clone(), di.clone()])
            };
            let cs = group.section(&alpha, orbit[i]);
            let ds = group.section(&beta, b_orbit[i]);
            ci = group.multiply(&ci, &cs);
            di = group.multiply(&di, &ds);
        }
    }
    sections
}

fn finish(group: &mut Group, h: Element, symbols: Vec<SymId>, a: &Element, b: &Element) -> Result<Option<Conjugator>> {
    certify(group, h, symbols, &[(a.clone(), b.clone())], VERIFY_DEPTH)
}

/// Conjugacy in the group of finitary automorphisms.
pub fn conjugate_in_finitary(group: &mut Group, a: &Element, b: &Element, cap: usize) -> Result<ConjDecision> {
    let Some(problem) = Problem::new(group, a, b, cap)? else {
        return Ok(ConjDecision::Unknown(format!("more than {cap} configurations")));
    };
    let sat = finitary_satisfiable(&problem.table);
    match finitary_witness(group, &problem.table, &sat, problem.root) {
        None => Ok(ConjDecision::NotConjugate(
            "the root configuration is not satisfied by a finitary automorphism".into(),
        )),
        Some(h) => match finish(group, h, Vec::new(), a, b)? {
            Some(c) => Ok(ConjDecision::Conjugate(c)),
            None => Ok(ConjDecision::Unknown("finitary witness failed verification".into())),
        },
    }
}

/// Limits of the bounded conjugator search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchCaps {
    /// Configurations and orbit-signalizer elements.
    pub elements: usize,
    /// Candidate conjugators examined.
    pub leaves: usize,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps {
            elements: 200,
            leaves: 4096,
        }
    }
}

/// How the conjugator handles one pair `(c, d)` of `OS(a) x OS(b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
enum PairPlan {
    Finitary(Element),
    Recurse(Perm),
}

/// Conjugacy in the group of bounded automorphisms.
///
/// Every pair `(c, d)` met below the root is solved by one fixed conjugator:
/// a finitary one when the pair's own root configuration is finitary
/// satisfiable, or the recursion of a surviving permutation, whose orbits
/// lead to further pairs. Assignments are searched depth first, finitary
/// plans first and permutations in lexicographic order; each complete
/// assignment defines a finite-state conjugator that is expanded, classified
/// and verified. The first bounded one is returned.
pub fn conjugate_in_pol0_cyclic(group: &mut Group, a: &Element, b: &Element, caps: SearchCaps) -> Result<ConjDecision> {
    let Some(mut problem) = Problem::new(group, a, b, caps.elements)? else {
        return Ok(ConjDecision::Unknown(format!("more than {} elements", caps.elements)));
    };
    if problem.graph.roots.is_empty() {
        return Ok(ConjDecision::NotConjugate(
            "not conjugate in Aut(T): no root vertex survives in the conjugator graph".into(),
        ));
    }
    let sat = finitary_satisfiable(&problem.table);
    if let Some(h) = finitary_witness(group, &problem.table, &sat, problem.root) {
        if let Some(c) = finish(group, h, Vec::new(), a, b)? {
            return Ok(ConjDecision::Conjugate(c));
        }
    }
    // finitary plans per pair
    let mut plans: HashMap<(usize, usize), Vec<PairPlan>> = HashMap::new();
    let mut search = Search {
        leaves: 0,
        cap: caps.leaves,
        found: None,
    };
    let mut assignment: BTreeMap<(usize, usize), PairPlan> = BTreeMap::new();
    search.run(group, &mut problem, &mut plans, &mut assignment, caps)?;
    if let Some(c) = search.found {
        return Ok(ConjDecision::Conjugate(c));
    }
    if search.leaves >= search.cap {
        return Ok(ConjDecision::Unknown(format!(
            "examined {} candidate conjugators without a bounded one",
            search.cap
        )));
    }
    Ok(ConjDecision::NotConjugate(format!(
        "none of the {} candidate conjugators is bounded",
        search.leaves
    )))
}

/// Conjugacy in the union of the polynomial groups; for bounded inputs it
/// coincides with conjugacy in the bounded group.
pub fn conjugate_in_pol_inf(group: &mut Group, a: &Element, b: &Element, caps: SearchCaps) -> Result<ConjDecision> {
    conjugate_in_pol0_cyclic(group, a, b, caps)
}

struct Search {
    leaves: usize,
    cap: usize,
    found: Option<Conjugator>,
}

impl Search {
    fn plans_for(
        &mut self,
        group: &mut Group,
        problem: &mut Problem,
        plans: &mut HashMap<(usize, usize), Vec<PairPlan>>,
        pair: (usize, usize),
        caps: SearchCaps,
    ) -> Result<Vec<PairPlan>> {
        if let Some(p) = plans.get(&pair) {
            return Ok(p.clone());
        }
        let mut out = Vec::new();
        if let Some(root) = problem.explore_pair(group, pair.0, pair.1, caps.elements)? {
            let sat = finitary_satisfiable(&problem.table);
            if let Some(h) = finitary_witness(group, &problem.table, &sat, root) {
                out.push(PairPlan::Finitary(h));
            }
        }
        for pi in problem.graph.surviving(pair.0, pair.1) {
            out.push(PairPlan::Recurse(pi));
        }
        plans.insert(pair, out.clone());
        Ok(out)
    }

    fn run(
        &mut self,
        group: &mut Group,
        problem: &mut Problem,
        plans: &mut HashMap<(usize, usize), Vec<PairPlan>>,
        assignment: &mut BTreeMap<(usize, usize), PairPlan>,
        caps: SearchCaps,
    ) -> Result<()> {
        if self.found.is_some() || self.leaves >= self.cap {
            return Ok(());
        }
        // first reached pair without a plan
        let next = reached(problem, assignment)
            .into_iter()
            .find(|p| !assignment.contains_key(p));
        match next {
            Some(pair) => {
                for plan in self.plans_for(group, problem, plans, pair, caps)? {
                    assignment.insert(pair, plan);
                    self.run(group, problem, plans, assignment, caps)?;
                    assignment.remove(&pair);
                    if self.found.is_some() || self.leaves >= self.cap {
                        break;
                    }
                }
            }
            None => {
                self.leaves += 1;
                let (h, symbols) = build_planned(group, &problem.graph, assignment);
                let bounded = group
                    .key_with_cap(&h, EXPANSION_CAP)
                    .map(|s| machine_class(&group.machine_of_state(s)).is_bounded())
                    .unwrap_or(false);
                if bounded {
                    self.found = finish(group, h, symbols, &problem.a, &problem.b)?;
                }
            }
        }
        Ok(())
    }
}

fn reached(problem: &Problem, assignment: &BTreeMap<(usize, usize), PairPlan>) -> Vec<(usize, usize)> {
    let g = &problem.graph;
    let mut out = vec![(0usize, 0usize)];
    let mut k = 0;
    while k < out.len() {
        let pair = out[k];
        k += 1;
        let Some(PairPlan::Recurse(pi)) = assignment.get(&pair) else {
            continue;
        };
        for e in &g.edges {
            let s = &g.vertices[e.source];
            if (s.c, s.d) == pair && &s.pi == pi {
                let t = &g.vertices[e.target];
                if !out.contains(&(t.c, t.d)) {
                    out.push((t.c, t.d));
                }
            }
        }
    }
    out
}

fn build_planned(
    group: &mut Group,
    graph: &ConjGraph,
    assignment: &BTreeMap<(usize, usize), PairPlan>,
) -> (Element, Vec<SymId>) {
    if let Some(PairPlan::Finitary(h)) = assignment.get(&(0, 0)) {
        return (h.clone(), Vec::new());
    }
    let mut syms: HashMap<(usize, usize), SymId> = HashMap::new();
    let mut order = Vec::new();
    for (pair, plan) in assignment {
        if let PairPlan::Recurse(pi) = plan {
            let s = group.reserve_symbol("h", pi.clone());
            syms.insert(*pair, s);
            order.push(*pair);
        }
    }
    // root first
    order.sort_by_key(|&p| p != (0, 0));
    let mut symbols = Vec::new();
    for &pair in &order {
        let PairPlan::Recurse(pi) = &assignment[&pair] else { unreachable!() };
        let (c, d) = pair;
        let alpha = graph.os_a.elements[c].as_state().expect("expanded");
        let beta = graph.os_b.elements[d].as_state().expect("expanded");
        let mut reps = Vec::new();
        for orbit in group.state_perm(alpha).orbits() {
            let x = orbit[0];
            let c1 = graph.os_a.power_section(c, x);
            let d1 = graph.os_b.power_section(d, pi.apply(x));
            let hx = match assignment.get(&(c1, d1)) {
                Some(PairPlan::Finitary(h)) => h.clone(),
                _ => group.symbol(syms[&(c1, d1)]),
            };
            reps.push((x, hx));
        }
        let sections = orbit_sections(group, alpha, beta, pi, &reps);
        group.set_sections(syms[&pair], sections);
        symbols.push(syms[&pair]);
    }
    let root = group.symbol(symbols[0]);
    (root, symbols)
}

// ----------------------------------------------------------------------
// active-state matrices
// ----------------------------------------------------------------------

/// The matrices `A_pi`, rows `theta_pi` and the initial vector of a pair.
///
/// Coordinates are the dependency pairs of the configurations, the
/// configurations in discovery order and the pairs of each in key order.
#[derive(Debug, Clone)]
pub struct ChoiceSystem {
    pub configurations: Vec<Configuration>,
    /// Permutation choices per configuration.
    pub options: Vec<Vec<Perm>>,
    /// First coordinate of every configuration.
    pub offsets: Vec<usize>,
    pub dim: usize,
    pub u0: Vec<u128>,
    steps: Vec<Vec<Step>>,
}

/// A choice of one permutation index per configuration.
pub type Choice = Vec<usize>;

impl ChoiceSystem {
    pub fn from_table(table: &ConfigTable, root: usize) -> Self {
        let mut offsets = Vec::with_capacity(table.len());
        let mut dim = 0;
        for c in &table.configurations {
            offsets.push(dim);
            dim += c.dp.len();
        }
        let mut u0 = vec![0u128; dim];
        let root_conf = &table.configurations[root];
        let e = root_conf
            .dp
            .iter()
            .position(|&p| p == (TRIVIAL, TRIVIAL))
            .expect("root configuration holds (e, e)");
        u0[offsets[root] + e] = 1;
        ChoiceSystem {
            configurations: table.configurations.clone(),
            options: (0..table.len()).map(|c| table.options(c)).collect(),
            offsets,
            dim,
            u0,
            steps: table.steps.clone(),
        }
    }

    /// Number of elements of `Pi`, saturating.
    pub fn choice_count(&self) -> usize {
        self.options
            .iter()
            .fold(1usize, |acc, o| acc.saturating_mul(o.len()))
    }

    /// Every choice, in lexicographic order.
    pub fn choices(&self) -> impl Iterator<Item = Choice> + '_ {
        let radix: Vec<usize> = self.options.iter().map(Vec::len).collect();
        let total = self.choice_count();
        (0..total).map(move |mut k| {
            let mut c = vec![0; radix.len()];
            for i in (0..radix.len()).rev() {
                c[i] = k % radix[i];
                k /= radix[i];
            }
            c
        })
    }

    /// The choice picking the given permutations.
    pub fn choice_of(&self, perms: &[Perm]) -> Option<Choice> {
        perms
            .iter()
            .zip(&self.options)
            .map(|(p, o)| o.iter().position(|q| q == p))
            .collect()
    }

    pub fn matrix(&self, choice: &[usize]) -> Vec<Vec<u128>> {
        let mut a = vec![vec![0u128; self.dim]; self.dim];
        for (c, &j) in choice.iter().enumerate() {
            let Some(step) = self.steps[c].get(j) else { continue };
            for m in &step.moves {
                for (k, targets) in m.pairs.iter().enumerate() {
                    for &t in targets {
                        a[self.offsets[m.target] + t][self.offsets[c] + k] += 1;
                    }
                }
            }
        }
        a
    }

    pub fn theta(&self, choice: &[usize]) -> Vec<u8> {
        let mut th = vec![0u8; self.dim];
        for (c, &j) in choice.iter().enumerate() {
            if let Some(step) = self.steps[c].get(j) {
                for (k, &v) in step.theta.iter().enumerate() {
                    th[self.offsets[c] + k] = v;
                }
            }
        }
        th
    }

    /// `A_pi u`, saturating at `limit`.
    pub fn apply(&self, choice: &[usize], u: &[u128], limit: u128) -> Vec<u128> {
        let a = self.matrix(choice);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .fold(0u128, |acc, j| acc.saturating_add(a[i][j].saturating_mul(u[j])))
                    .min(limit)
            })
            .collect()
    }

    pub fn dot(theta: &[u8], u: &[u128]) -> u128 {
        theta
            .iter()
            .zip(u)
            .filter(|(t, _)| **t == 1)
            .fold(0u128, |acc, (_, v)| acc.saturating_add(*v))
    }

    /// `theta_n` for `n < count` along an eventually periodic choice, saturating at `limit`.
    pub fn activity(&self, pre: &[Choice], period: &[Choice], count: usize, limit: u128) -> Vec<u128> {
        let mut u = self.u0.clone();
        let mut out = Vec::with_capacity(count);
        for n in 0..count {
            let c = if n < pre.len() {
                &pre[n]
            } else {
                &period[(n - pre.len()) % period.len()]
            };
            out.push(Self::dot(&self.theta(c), &u).min(limit));
            u = self.apply(c, &u, limit);
        }
        out
    }
}

/// The active-state system of a bounded pair. `Ok(None)` on cap.
pub fn choice_system(group: &mut Group, a: &Element, b: &Element, cap: usize) -> Result<Option<ChoiceSystem>> {
    Ok(Problem::new(group, a, b, cap)?.map(|p| ChoiceSystem::from_table(&p.table, p.root)))
}

/// Bounds of the eventually periodic choice search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChoiceBounds {
    pub preperiod: usize,
    pub period: usize,
    /// Saturation value for the reported activity values.
    pub threshold: u128,
    /// Candidate choice sequences examined at most.
    pub budget: usize,
}

impl Default for ChoiceBounds {
    fn default() -> Self {
        ChoiceBounds {
            preperiod: 4,
            period: 6,
            threshold: 1 << 16,
            budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChoiceSearch {
    /// Choices `pre` followed by `period` repeated forever keep `theta_n` bounded.
    Found { pre: Vec<Choice>, period: Vec<Choice> },
    NotFoundWithinBounds,
}

/// Searches eventually periodic choices with bounded activity.
///
/// For a preperiod reaching `u_p` and a period with product `M`, the
/// activity at phase `j` is `r_j M^k u_p`, where `r_j` is `theta` of the
/// phase pulled back through the earlier period matrices. That sequence is
/// bounded exactly when, on the support graph of `M` restricted to
/// coordinates reachable from `supp(u_p)` and reaching `supp(r_j)`, every
/// cyclic component is a single cycle of unit entries and no path joins two
/// cyclic components. Only supports matter, so preperiods are enumerated by
/// the distinct supports they reach.
pub fn bounded_choice_search(sys: &ChoiceSystem, bounds: ChoiceBounds) -> ChoiceSearch {
    let count = sys.choice_count();
    if count == 0 {
        return ChoiceSearch::NotFoundWithinBounds;
    }
    let choices: Vec<Choice> = sys.choices().take(bounds.budget).collect();
    let matrices: Vec<Vec<Vec<u128>>> = choices.iter().map(|c| sys.matrix(c)).collect();
    let support = |u: &[bool], a: &Vec<Vec<u128>>| -> Vec<bool> {
        (0..sys.dim)
            .map(|i| (0..sys.dim).any(|j| u[j] && a[i][j] > 0))
            .collect()
    };
    // distinct supports after each preperiod length
    let mut pres: Vec<(Vec<usize>, Vec<bool>)> = vec![(Vec::new(), sys.u0.iter().map(|&x| x > 0).collect())];
    let mut frontier = pres.clone();
    for _ in 0..bounds.preperiod {
        let mut next = Vec::new();
        for (word, u) in &frontier {
            for (i, a) in matrices.iter().enumerate() {
                let s = support(u, a);
                if !pres.iter().any(|(_, t)| *t == s) && !next.iter().any(|(_, t): &(Vec<usize>, Vec<bool>)| *t == s) {
                    let mut w = word.clone();
                    w.push(i);
                    next.push((w, s));
                }
            }
        }
        pres.extend(next.iter().cloned());
        frontier = next;
    }
    let mut budget = bounds.budget;
    for len in 1..=bounds.period {
        let total = choices.len().checked_pow(len as u32).unwrap_or(usize::MAX);
        for code in 0..total {
            let mut period = Vec::with_capacity(len);
            let mut k = code;
            for _ in 0..len {
                period.push(k % choices.len());
                k /= choices.len();
            }
            period.reverse();
            if !primitive(&period) {
                continue;
            }
            for (pre, u) in &pres {
                if budget == 0 {
                    return ChoiceSearch::NotFoundWithinBounds;
                }
                budget -= 1;
                if periodic_bounded(sys, &matrices, &choices, u, &period) {
                    return ChoiceSearch::Found {
                        pre: pre.iter().map(|&i| choices[i].clone()).collect(),
                        period: period.iter().map(|&i| choices[i].clone()).collect(),
                    };
                }
            }
        }
    }
    ChoiceSearch::NotFoundWithinBounds
}

fn primitive(word: &[usize]) -> bool {
    let n = word.len();
    (1..n).filter(|p| n.is_multiple_of(*p)).all(|p| (0..n).any(|i| word[i] != word[i % p]))
}

fn mat_mul(a: &[Vec<u128>], b: &[Vec<u128>]) -> Vec<Vec<u128>> {
    let n = a.len();
    let mut c = vec![vec![0u128; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                c[i][j] = c[i][j].saturating_add(a[i][k].saturating_mul(b[k][j]));
            }
        }
    }
    c
}

fn periodic_bounded(
    sys: &ChoiceSystem,
    matrices: &[Vec<Vec<u128>>],
    choices: &[Choice],
    u: &[bool],
    period: &[usize],
) -> bool {
    let n = sys.dim;
    let identity: Vec<Vec<u128>> = (0..n).map(|i| (0..n).map(|j| u128::from(i == j)).collect()).collect();
    // prefix products P_j = A_(j-1) .. A_0 and the full period product
    let mut prefix = vec![identity];
    for &i in period {
        let next = mat_mul(&matrices[i], prefix.last().unwrap());
        prefix.push(next);
    }
    let m = prefix.pop().unwrap();
    let adj: Vec<Vec<usize>> = (0..n).map(|j| (0..n).filter(|&i| m[i][j] > 0).collect()).collect();
    // reachable from supp(u)
    let mut fwd = u.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&i| u[i]).collect();
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !fwd[w] {
                fwd[w] = true;
                stack.push(w);
            }
        }
    }
    for (j, p) in prefix.iter().enumerate() {
        let theta = sys.theta(&choices[period[j]]);
        // r_j = theta P_j
        let r: Vec<bool> = (0..n)
            .map(|col| (0..n).any(|row| theta[row] == 1 && p[row][col] > 0))
            .collect();
        let mut back = r.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&i| r[i]).collect();
        while let Some(w) = stack.pop() {
            for v in 0..n {
                if adj[v].contains(&w) && !back[v] {
                    back[v] = true;
                    stack.push(v);
                }
            }
        }
        let live: Vec<bool> = (0..n).map(|i| fwd[i] && back[i]).collect();
        if !live.iter().any(|&x| x) {
            continue;
        }
        let sub: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if live[v] {
                    adj[v].iter().copied().filter(|&w| live[w]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let (comp, count) = scc(&sub);
        let mut cyclic = vec![false; count];
        for v in (0..n).filter(|&v| live[v]) {
            let inside: Vec<usize> = sub[v].iter().copied().filter(|&w| comp[w] == comp[v]).collect();
            if inside.is_empty() {
                continue;
            }
            cyclic[comp[v]] = true;
            if inside.len() != 1 || m[inside[0]][v] != 1 {
                return false;
            }
        }
        // at most one cyclic component along any path (components sinks first)
        let mut chain = vec![0usize; count];
        let mut order: Vec<usize> = (0..n).filter(|&v| live[v]).collect();
        order.sort_by_key(|&v| comp[v]);
        for v in order {
            let c = comp[v];
            let below = sub[v]
                .iter()
                .filter(|&&w| comp[w] != c)
                .map(|&w| chain[comp[w]])
                .max()
                .unwrap_or(0);
            chain[c] = chain[c].max(below + usize::from(cyclic[c]));
            if chain[c] > 1 {
                return false;
            }
        }
    }
    true
}

/// The conjugator following an eventually periodic choice: one symbol per
/// reached configuration and phase.
pub fn conjugator_from_choice(
    group: &mut Group,
    sys: &ChoiceSystem,
    pre: &[Choice],
    period: &[Choice],
) -> (Element, Vec<SymId>) {
    let phases = pre.len() + period.len();
    let next_phase = |t: usize| if t + 1 < phases { t + 1 } else { pre.len() };
    let choice_at = |t: usize| if t < pre.len() { &pre[t] } else { &period[t - pre.len()] };
    let mut syms: HashMap<(usize, usize), SymId> = HashMap::new();
    let mut order = vec![(0usize, 0usize)];
    let pi0 = sys.options[0][choice_at(0)[0]].clone();
    syms.insert((0, 0), group.reserve_symbol("h", pi0));
    let mut k = 0;
    let mut symbols = Vec::new();
    while k < order.len() {
        let (c, t) = order[k];
        k += 1;
        let j = choice_at(t)[c];
        let step = sys.steps[c][j].clone();
        let mut reps = Vec::new();
        for m in &step.moves {
            let key = (m.target, next_phase(t));
            let s = match syms.get(&key) {
                Some(&s) => s,
                None => {
                    let pi = sys.options[m.target][choice_at(key.1)[m.target]].clone();
                    let s = group.reserve_symbol("h", pi);
                    syms.insert(key, s);
                    order.push(key);
                    s
                }
            };
            reps.push((m.letter, group.symbol(s)));
        }
        let conf = &sys.configurations[c];
        let sections = orbit_sections(group, conf.alpha, conf.beta, &step.pi, &reps);
        group.set_sections(syms[&(c, t)], sections);
        symbols.push(syms[&(c, t)]);
    }
    (group.symbol(symbols[0]), symbols)
}

/// Cross-check decision from the matrix search: `Conjugate` with a verified
/// bounded conjugator when an eventually periodic choice is found.
pub fn conjugate_by_choice_search(
    group: &mut Group,
    a: &Element,
    b: &Element,
    cap: usize,
    bounds: ChoiceBounds,
) -> Result<ConjDecision> {
    let Some(sys) = choice_system(group, a, b, cap)? else {
        return Ok(ConjDecision::Unknown(format!("more than {cap} configurations")));
    };
    match bounded_choice_search(&sys, bounds) {
        ChoiceSearch::NotFoundWithinBounds => Ok(ConjDecision::Unknown(
            "no bounded eventually periodic choice within the search bounds".into(),
        )),
        ChoiceSearch::Found { pre, period } => {
            let (h, symbols) = conjugator_from_choice(group, &sys, &pre, &period);
            match finish(group, h, symbols, a, b)? {
                Some(c) if c.class.as_ref().is_some_and(ActivityClass::is_bounded) => {
                    Ok(ConjDecision::Conjugate(c))
                }
                _ => Ok(ConjDecision::Unknown(
                    "conjugator from the periodic choice failed verification".into(),
                )),
            }
        }
    }
}
