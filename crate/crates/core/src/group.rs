//! Tree automorphisms as words over functionally recursive symbols.
//!
//! A [`Group`] owns the symbols of one or more loaded systems together with a
//! store of canonical finite-state automorphisms. An [`Element`] is a freely
//! reduced word whose factors are either symbols (possibly inverted) or
//! canonical store states. Adjacent store states are multiplied eagerly, so a
//! word over finite-state symbols collapses to a single state and equality
//! becomes comparison of state ids. Symbols that are not (yet) known to be
//! finite-state stay symbolic and are expanded lazily through their
//! defining recursion.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::perm::{Alphabet, Letter, Perm};
use crate::system::{parse_system, parse_word, Definition, FRSystem, SymbolPower, Word};
use crate::universe::{Pending, StateId, Target, Universe, TRIVIAL};

pub type SymId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Factor {
    State(StateId),
    Sym(SymId, bool),
}

/// An automorphism of the tree, as a reduced word over symbols and canonical states.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub(crate) factors: Vec<Factor>,
}

impl Element {
    pub fn identity() -> Self {
        Element::default()
    }

    pub fn from_state(s: StateId) -> Self {
        if s == TRIVIAL {
            Element::identity()
        } else {
            Element {
                factors: vec![Factor::State(s)],
            }
        }
    }

    /// The canonical state, when the word has already collapsed to one.
    pub fn as_state(&self) -> Option<StateId> {
        match self.factors.as_slice() {
            [] => Some(TRIVIAL),
            [Factor::State(s)] => Some(*s),
            _ => None,
        }
    }

    pub fn is_trivial_word(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Outcome of the word problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equality {
    Equal,
    NotEqual,
    ExceededCap,
}

impl Equality {
    pub fn is_equal(self) -> bool {
        self == Equality::Equal
    }
}

/// Exploration budgets for the word problem and finite-state expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Section pairs visited by the bisimulation check on symbolic words.
    pub equality_pairs: usize,
    /// States of a finite-state expansion.
    pub machine_states: usize,
    /// Factors in a single word met during expansion.
    pub word_length: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            equality_pairs: 1_000_000,
            machine_states: 100_000,
            word_length: 4096,
        }
    }
}

/// A minimal Mealy machine of a finite-state automorphism.
///
/// State 0 is the automorphism itself; `states` holds canonical keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub degree: usize,
    pub states: Vec<StateId>,
    pub outputs: Vec<Perm>,
    pub transitions: Vec<Vec<usize>>,
    pub trivial: Option<usize>,
}

impl Machine {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_active(&self, i: usize) -> bool {
        !self.outputs[i].is_identity()
    }

    /// The machine as a system: state 0 is `prefix`, state `i` is
    /// `prefix_i`, and the trivial state is written `e`.
    pub fn system(&self, prefix: &str) -> FRSystem {
        let name = |i: usize| {
            if i == 0 {
                prefix.to_string()
            } else {
                format!("{prefix}_{i}")
            }
        };
        let word = |t: usize| {
            if Some(t) == self.trivial {
                Word::default()
            } else {
                Word(vec![SymbolPower {
                    name: name(t),
                    inverse: false,
                }])
            }
        };
        let definitions = (0..self.len())
            .filter(|&i| Some(i) != self.trivial || i == 0)
            .map(|i| Definition {
                name: name(i),
                perm: self.outputs[i].clone(),
                sections: if Some(i) == self.trivial {
                    vec![Word::default(); self.degree]
                } else {
                    self.transitions[i].iter().map(|&t| word(t)).collect()
                },
            })
            .collect();
        FRSystem {
            alphabet: Alphabet::new(self.degree).expect("machine degree is valid"),
            definitions,
        }
    }
}

#[derive(Debug, Clone)]
struct Symbol {
    name: String,
    perm: Perm,
    sections: Vec<Element>,
    resolved: Option<StateId>,
}

type Label = Vec<(SymId, bool)>;

#[derive(Debug)]
pub struct Group {
    alphabet: Alphabet,
    u: Universe,
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymId>,
    labels: HashMap<StateId, Label>,
    resolved_words: HashMap<Vec<Factor>, StateId>,
    failed: HashSet<Vec<Factor>>,
    fresh_counter: usize,
    pub budgets: Budgets,
}

impl Group {
    pub fn new(alphabet: Alphabet) -> Self {
        let mut labels = HashMap::new();
        labels.insert(TRIVIAL, Vec::new());
        Group {
            alphabet,
            u: Universe::new(alphabet.degree()),
            symbols: Vec::new(),
            by_name: HashMap::new(),
            labels,
            resolved_words: HashMap::new(),
            failed: HashSet::new(),
            fresh_counter: 0,
            budgets: Budgets::default(),
        }
    }

    /// Parses a system and loads it into a fresh group.
    pub fn parse(text: &str) -> Result<Self> {
        let system = parse_system(text)?;
        let mut g = Group::new(system.alphabet);
        g.load(&system)?;
        Ok(g)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn degree(&self) -> usize {
        self.alphabet.degree()
    }

    /// Adds the symbols of `system` and expands every finite-state one.
    pub fn load(&mut self, system: &FRSystem) -> Result<Vec<Element>> {
        system.validate()?;
        if system.alphabet != self.alphabet {
            return Err(Error::DegreeTooSmall(system.alphabet.degree()).into_mismatch(self));
        }
        for def in &system.definitions {
            if self.by_name.contains_key(&def.name) {
                return Err(Error::DuplicateSymbol(def.name.clone()));
            }
        }
        let first = self.symbols.len() as SymId;
        for def in &system.definitions {
            let id = self.symbols.len() as SymId;
            self.by_name.insert(def.name.clone(), id);
            self.symbols.push(Symbol {
                name: def.name.clone(),
                perm: def.perm.clone(),
                sections: Vec::new(),
                resolved: None,
            });
        }
        for (k, def) in system.definitions.iter().enumerate() {
            let sections = def
                .sections
                .iter()
                .map(|w| self.word_element(w))
                .collect::<Result<Vec<_>>>()?;
            self.symbols[first as usize + k].sections = sections;
        }
        let elements: Vec<Element> = (0..system.definitions.len())
            .map(|k| Element {
                factors: vec![Factor::Sym(first + k as SymId, false)],
            })
            .collect();
        for e in &elements {
            self.key(e);
        }
        Ok(elements
            .iter()
            .map(|e| self.normalize(e.factors.iter().copied()))
            .collect())
    }

    /// Adds one symbol with the given root permutation and sections.
    ///
    /// The symbol is not expanded; call [`Group::key`] to attempt that.
    /// A name is generated from `prefix` when it collides.
    pub fn add_symbol(&mut self, prefix: &str, perm: Perm, sections: Vec<Element>) -> SymId {
        let mut name = prefix.to_string();
        while self.by_name.contains_key(&name) || name == "e" {
            self.fresh_counter += 1;
            name = format!("{prefix}_{}", self.fresh_counter);
        }
        self.add_symbol_named(name, perm, sections)
    }

    /// Reserves a symbol whose sections are filled in later by [`Group::set_sections`].
    pub fn reserve_symbol(&mut self, prefix: &str, perm: Perm) -> SymId {
        let d = self.degree();
        self.add_symbol(prefix, perm, vec![Element::identity(); d])
    }

    pub fn set_sections(&mut self, sym: SymId, sections: Vec<Element>) {
        assert_eq!(sections.len(), self.degree());
        let s = &mut self.symbols[sym as usize];
        assert!(s.resolved.is_none(), "symbol already expanded");
        s.sections = sections;
    }

    fn add_symbol_named(&mut self, name: String, perm: Perm, sections: Vec<Element>) -> SymId {
        assert_eq!(sections.len(), self.degree());
        let id = self.symbols.len() as SymId;
        self.by_name.insert(name.clone(), id);
        self.symbols.push(Symbol {
            name,
            perm,
            sections,
            resolved: None,
        });
        id
    }

    pub fn symbol(&self, sym: SymId) -> Element {
        Element {
            factors: vec![Factor::Sym(sym, false)],
        }
    }

    pub fn symbol_name(&self, sym: SymId) -> &str {
        &self.symbols[sym as usize].name
    }

    pub fn symbol_perm(&self, sym: SymId) -> &Perm {
        &self.symbols[sym as usize].perm
    }

    pub fn symbol_sections(&self, sym: SymId) -> &[Element] {
        &self.symbols[sym as usize].sections
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    /// The element named by a defined symbol.
    pub fn element(&mut self, name: &str) -> Result<Element> {
        self.word_element(&Word::symbol(name))
    }

    /// Parses a word such as `a*b^-1` over the loaded symbols.
    pub fn word(&mut self, text: &str) -> Result<Element> {
        let w = parse_word(text)?;
        self.word_element(&w)
    }

    pub fn word_element(&mut self, w: &Word) -> Result<Element> {
        let mut factors = Vec::with_capacity(w.0.len());
        for p in &w.0 {
            let id = *self
                .by_name
                .get(&p.name)
                .ok_or_else(|| Error::UnknownSymbol(p.name.clone()))?;
            factors.push(Factor::Sym(id, p.inverse));
        }
        Ok(self.normalize(factors))
    }

    pub fn identity(&self) -> Element {
        Element::identity()
    }

    // ------------------------------------------------------------------
    // normal forms and state arithmetic
    // ------------------------------------------------------------------

    fn mul_states(&mut self, p: StateId, q: StateId) -> StateId {
        let r = self.u.product(p, q);
        self.propagate_labels();
        r
    }

    fn inv_state(&mut self, p: StateId) -> StateId {
        let r = self.u.inverse(p);
        self.propagate_labels();
        r
    }

    /// Labels new store states from the labels of the states they were built from.
    fn propagate_labels(&mut self) {
        for (s, word) in self.u.take_provenance() {
            let mut label = Vec::new();
            let mut ok = true;
            for (state, inverse) in word {
                match self.labels.get(&state) {
                    Some(l) if !inverse => label.extend(l.iter().copied()),
                    Some(l) => label.extend(l.iter().rev().map(|&(i, inv)| (i, !inv))),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let label = reduce_label(label);
                self.offer_label(s, label);
            }
        }
    }

    fn offer_label(&mut self, s: StateId, label: Label) {
        match self.labels.get(&s) {
            Some(old) if old.len() <= label.len() => {}
            _ => {
                self.labels.insert(s, label);
            }
        }
    }

    pub(crate) fn normalize(&mut self, factors: impl IntoIterator<Item = Factor>) -> Element {
        let mut out: Vec<Factor> = Vec::new();
        for f in factors {
            let f = match f {
                Factor::Sym(i, inv) => match self.symbols[i as usize].resolved {
                    Some(s) if !inv => Factor::State(s),
                    Some(s) => Factor::State(self.inv_state(s)),
                    None => f,
                },
                other => other,
            };
            match (out.last().copied(), f) {
                (_, Factor::State(TRIVIAL)) => {}
                (Some(Factor::State(p)), Factor::State(q)) => {
                    let r = self.mul_states(p, q);
                    out.pop();
                    if r != TRIVIAL {
                        out.push(Factor::State(r));
                    }
                }
                (Some(Factor::Sym(i, a)), Factor::Sym(j, b)) if i == j && a != b => {
                    out.pop();
                }
                _ => out.push(f),
            }
        }
        Element { factors: out }
    }

    pub fn multiply(&mut self, g: &Element, h: &Element) -> Element {
        self.normalize(g.factors.iter().chain(h.factors.iter()).copied())
    }

    pub fn product(&mut self, elements: &[Element]) -> Element {
        self.normalize(elements.iter().flat_map(|e| e.factors.iter().copied()))
    }

    pub fn inverse(&mut self, g: &Element) -> Element {
        let mut factors = Vec::with_capacity(g.factors.len());
        for f in g.factors.iter().rev() {
            factors.push(match *f {
                Factor::State(s) => Factor::State(self.inv_state(s)),
                Factor::Sym(i, inv) => Factor::Sym(i, !inv),
            });
        }
        self.normalize(factors)
    }

    pub fn power(&mut self, g: &Element, n: i64) -> Element {
        if let Some(s) = self.known_key(g) {
            let r = self.u.power(s, n);
            self.propagate_labels();
            return Element::from_state(r);
        }
        let base = if n < 0 { self.inverse(g) } else { g.clone() };
        let factors: Vec<Factor> = (0..n.unsigned_abs())
            .flat_map(|_| base.factors.iter().copied())
            .collect();
        self.normalize(factors)
    }

    /// `h^-1 g h`.
    pub fn conjugate(&mut self, g: &Element, h: &Element) -> Element {
        let hi = self.inverse(h);
        self.product(&[hi, g.clone(), h.clone()])
    }

    // ------------------------------------------------------------------
    // action and sections
    // ------------------------------------------------------------------

    pub fn root_perm(&self, g: &Element) -> Perm {
        let mut p = Perm::identity(self.degree());
        for f in &g.factors {
            p = match *f {
                Factor::State(s) => p.then(self.u.perm(s)),
                Factor::Sym(i, false) => p.then(&self.symbols[i as usize].perm),
                Factor::Sym(i, true) => p.then(&self.symbols[i as usize].perm.inverse()),
            };
        }
        p
    }

    /// The image of one letter, `x^g`.
    pub fn image(&self, g: &Element, x: Letter) -> Letter {
        let mut y = x;
        for f in &g.factors {
            y = match *f {
                Factor::State(s) => self.u.perm(s).apply(y),
                Factor::Sym(i, false) => self.symbols[i as usize].perm.apply(y),
                Factor::Sym(i, true) => self.symbols[i as usize].perm.inverse().apply(y),
            };
        }
        y
    }

    /// `g|_x`, by `(g h)|_x = g|_x h|_(x^g)` and `g^-1|_x = (g|_(x^(g^-1)))^-1`.
    pub fn section(&mut self, g: &Element, x: Letter) -> Element {
        let mut y = x;
        let mut out: Vec<Factor> = Vec::new();
        for f in &g.factors {
            match *f {
                Factor::State(s) => {
                    out.push(Factor::State(self.u.section(s, y)));
                    y = self.u.perm(s).apply(y);
                }
                Factor::Sym(i, false) => {
                    let sym = &self.symbols[i as usize];
                    out.extend(sym.sections[y].factors.iter().copied());
                    y = sym.perm.apply(y);
                }
                Factor::Sym(i, true) => {
                    let sym = &self.symbols[i as usize];
                    let z = sym.perm.inverse().apply(y);
                    let sec = sym.sections[z].clone();
                    let inv = self.inverse(&sec);
                    out.extend(inv.factors);
                    y = z;
                }
            }
        }
        self.normalize(out)
    }

    /// `g|_v` for a word `v`.
    pub fn section_word(&mut self, g: &Element, v: &[Letter]) -> Element {
        let mut h = g.clone();
        for &x in v {
            h = self.section(&h, x);
        }
        h
    }

    /// The image `v^g` of a word.
    pub fn act(&mut self, g: &Element, v: &[Letter]) -> Vec<Letter> {
        let mut h = g.clone();
        let mut out = Vec::with_capacity(v.len());
        for &x in v {
            out.push(self.image(&h, x));
            h = self.section(&h, x);
        }
        out
    }

    /// The orbit `x, x^g, x^(g^2), ..` of a letter.
    pub fn orbit(&self, g: &Element, x: Letter) -> Vec<Letter> {
        let p = self.root_perm(g);
        let mut orbit = vec![x];
        let mut y = p.apply(x);
        while y != x {
            orbit.push(y);
            y = p.apply(y);
        }
        orbit
    }

    /// Orbit size `m` of `x` and `g^m|_x = g|_x g|_(x^g) .. g|_(x^(g^(m-1)))`.
    pub fn orbit_power_section(&mut self, g: &Element, x: Letter) -> (usize, Element) {
        let orbit = self.orbit(g, x);
        let sections: Vec<Element> = orbit.iter().map(|&y| self.section(g, y)).collect();
        (orbit.len(), self.product(&sections))
    }

    // ------------------------------------------------------------------
    // canonical keys, equality, expansion
    // ------------------------------------------------------------------

    pub(crate) fn known_key(&mut self, g: &Element) -> Option<StateId> {
        let g = self.normalize(g.factors.iter().copied());
        if let Some(s) = g.as_state() {
            return Some(s);
        }
        self.resolved_words.get(&g.factors).copied()
    }

    /// The canonical key of `g`: the store state equal to it, after expanding
    /// `g` to a finite-state machine if needed. `None` when the expansion
    /// exceeds the budgets.
    pub fn key(&mut self, g: &Element) -> Option<StateId> {
        self.key_with_cap(g, self.budgets.machine_states)
    }

    pub fn key_with_cap(&mut self, g: &Element, cap: usize) -> Option<StateId> {
        let g = self.normalize(g.factors.iter().copied());
        if let Some(s) = g.as_state() {
            return Some(s);
        }
        if let Some(&s) = self.resolved_words.get(&g.factors) {
            return Some(s);
        }
        if self.failed.contains(&g.factors) {
            return None;
        }
        match self.expand(&g.factors, cap) {
            Some(s) => Some(s),
            None => {
                self.failed.insert(g.factors.clone());
                None
            }
        }
    }

    /// Explores the section closure of a word and interns it.
    fn expand(&mut self, root: &[Factor], cap: usize) -> Option<StateId> {
        let d = self.degree();
        let mut index: HashMap<Vec<Factor>, usize> = HashMap::new();
        let mut words: Vec<Vec<Factor>> = vec![root.to_vec()];
        index.insert(root.to_vec(), 0);
        let mut pending: Vec<Pending> = Vec::new();
        let mut k = 0;
        while k < words.len() {
            if words.len() > cap {
                return None;
            }
            let g = Element {
                factors: words[k].clone(),
            };
            k += 1;
            let perm = self.root_perm(&g);
            let mut succ = Vec::with_capacity(d);
            for x in 0..d {
                let s = self.section(&g, x);
                if s.factors.len() > self.budgets.word_length {
                    return None;
                }
                let target = if let Some(st) = s.as_state() {
                    Target::Old(st)
                } else if let Some(&st) = self.resolved_words.get(&s.factors) {
                    Target::Old(st)
                } else if let Some(&j) = index.get(&s.factors) {
                    Target::New(j)
                } else {
                    if self.failed.contains(&s.factors) {
                        return None;
                    }
                    index.insert(s.factors.clone(), words.len());
                    words.push(s.factors);
                    Target::New(words.len() - 1)
                };
                succ.push(target);
            }
            pending.push(Pending { perm, succ });
        }
        let ids = self.u.intern(&pending);
        self.u.take_provenance();
        for (w, &id) in words.iter().zip(&ids) {
            self.resolved_words.insert(w.clone(), id);
            if let Some(label) = self.label_of_factors(w) {
                self.offer_label(id, label);
            }
            if let [Factor::Sym(i, inv)] = w.as_slice() {
                let s = if *inv { self.inv_state(id) } else { id };
                self.symbols[*i as usize].resolved = Some(s);
                self.offer_label(s, vec![(*i, false)]);
            }
        }
        Some(ids[0])
    }

    fn label_of_factors(&self, w: &[Factor]) -> Option<Label> {
        let mut label = Vec::new();
        for f in w {
            match *f {
                Factor::Sym(i, inv) => label.push((i, inv)),
                Factor::State(s) => label.extend(self.labels.get(&s)?.iter().copied()),
            }
        }
        Some(reduce_label(label))
    }

    /// Whether the symbol has been expanded to a finite-state machine.
    pub fn is_expanded(&self, sym: SymId) -> bool {
        self.symbols[sym as usize].resolved.is_some()
    }

    /// Word problem with the default pair budget.
    pub fn equal(&mut self, g: &Element, h: &Element) -> Equality {
        self.equal_with_cap(g, h, self.budgets.equality_pairs)
    }

    /// Decides `g = h` by synchronized bisimulation over section pairs.
    pub fn equal_with_cap(&mut self, g: &Element, h: &Element, cap: usize) -> Equality {
        let g = self.normalize(g.factors.iter().copied());
        let h = self.normalize(h.factors.iter().copied());
        if g == h {
            return Equality::Equal;
        }
        if let (Some(a), Some(b)) = (self.key(&g), self.key(&h)) {
            return if a == b {
                Equality::Equal
            } else {
                Equality::NotEqual
            };
        }
        let d = self.degree();
        let mut seen: HashSet<(Element, Element)> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert((g.clone(), h.clone()));
        queue.push_back((g, h));
        while let Some((g, h)) = queue.pop_front() {
            if g == h {
                continue;
            }
            if let (Some(a), Some(b)) = (self.known_key(&g), self.known_key(&h)) {
                if a != b {
                    return Equality::NotEqual;
                }
                continue;
            }
            if self.root_perm(&g) != self.root_perm(&h) {
                return Equality::NotEqual;
            }
            for x in 0..d {
                let gs = self.section(&g, x);
                let hs = self.section(&h, x);
                if seen.insert((gs.clone(), hs.clone())) {
                    if seen.len() > cap {
                        return Equality::ExceededCap;
                    }
                    queue.push_back((gs, hs));
                }
            }
        }
        Equality::Equal
    }

    pub fn is_trivial(&mut self, g: &Element) -> Equality {
        self.equal(g, &Element::identity())
    }

    /// The minimal machine of `g`, or `ExceededCap` when `g` does not expand
    /// to a finite-state machine within `cap` states.
    pub fn minimize(&mut self, g: &Element, cap: usize) -> Result<Machine> {
        let s = self.key_with_cap(g, cap).ok_or(Error::ExceededCap(cap))?;
        Ok(self.machine_of_state(s))
    }

    pub fn machine(&mut self, g: &Element) -> Result<Machine> {
        self.minimize(g, self.budgets.machine_states)
    }

    pub(crate) fn machine_of_state(&self, s: StateId) -> Machine {
        let d = self.degree();
        let states = self.u.reachable(s);
        let index: HashMap<StateId, usize> =
            states.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        Machine {
            degree: d,
            outputs: states.iter().map(|&t| self.u.perm(t).clone()).collect(),
            transitions: states
                .iter()
                .map(|&t| (0..d).map(|x| index[&self.u.section(t, x)]).collect())
                .collect(),
            trivial: index.get(&TRIVIAL).copied(),
            states,
        }
    }

    /// Builds `(s_0, .., s_(d-1)) perm` from finite-state sections.
    pub fn wreath(&mut self, perm: Perm, sections: &[Element]) -> Option<Element> {
        let mut keys = Vec::with_capacity(sections.len());
        for s in sections {
            keys.push(self.key(s)?);
        }
        let s = self.u.wreath(perm, &keys);
        self.u.take_provenance();
        Some(Element::from_state(s))
    }

    pub fn state_perm(&self, s: StateId) -> &Perm {
        self.u.perm(s)
    }

    pub fn state_section(&self, s: StateId, x: Letter) -> StateId {
        self.u.section(s, x)
    }

    /// Number of canonical states held by the store.
    pub fn store_size(&self) -> usize {
        self.u.len()
    }

    // ------------------------------------------------------------------
    // rendering
    // ------------------------------------------------------------------

    /// A word over symbols describing `g`, when every factor has a known one.
    pub fn element_word(&self, g: &Element) -> Option<Word> {
        let label = self.label_of_factors(&g.factors)?;
        Some(Word(
            label
                .into_iter()
                .map(|(i, inverse)| SymbolPower {
                    name: self.symbols[i as usize].name.clone(),
                    inverse,
                })
                .collect(),
        ))
    }

    /// Renders `g` as a word over symbols; unlabeled store states print as `#id`.
    pub fn display(&self, g: &Element) -> String {
        if let Some(w) = self.element_word(g) {
            return w.to_string();
        }
        g.factors
            .iter()
            .map(|f| match *f {
                Factor::State(s) => match self.labels.get(&s) {
                    Some(l) => self.render_label(l),
                    None => format!("#{s}"),
                },
                Factor::Sym(i, false) => self.symbols[i as usize].name.clone(),
                Factor::Sym(i, true) => format!("{}^-1", self.symbols[i as usize].name),
            })
            .join("*")
    }

    fn render_label(&self, l: &Label) -> String {
        if l.is_empty() {
            return "e".into();
        }
        l.iter()
            .map(|&(i, inv)| {
                let n = &self.symbols[i as usize].name;
                if inv {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .join("*")
    }

    /// The symbols `syms` written out as a system over symbol words.
    pub fn system_of(&self, syms: &[SymId]) -> FRSystem {
        let definitions = syms
            .iter()
            .map(|&i| {
                let s = &self.symbols[i as usize];
                Definition {
                    name: s.name.clone(),
                    perm: s.perm.clone(),
                    sections: s
                        .sections
                        .iter()
                        .map(|e| {
                            self.element_word(e).unwrap_or_else(|| {
                                Word(vec![SymbolPower {
                                    name: self.display(e),
                                    inverse: false,
                                }])
                            })
                        })
                        .collect(),
                }
            })
            .collect();
        FRSystem {
            alphabet: self.alphabet,
            definitions,
        }
    }

    /// Every symbol of the group written out as one system.
    pub fn system(&self) -> FRSystem {
        let all: Vec<SymId> = (0..self.symbols.len() as SymId).collect();
        self.system_of(&all)
    }
}

fn reduce_label(label: Label) -> Label {
    let mut out: Label = Vec::with_capacity(label.len());
    for f in label {
        match out.last() {
            Some(&(i, inv)) if i == f.0 && inv != f.1 => {
                out.pop();
            }
            _ => out.push(f),
        }
    }
    out
}

impl Error {
    fn into_mismatch(self, g: &Group) -> Error {
        match self {
            Error::DegreeTooSmall(d) => Error::Syntax {
                line: 1,
                column: 1,
                message: format!(
                    "alphabet {d} does not match the group alphabet {}",
                    g.degree()
                ),
            },
            e => e,
        }
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            writeln!(
                f,
                "q{i} = ({}) {}",
                self.transitions[i].iter().map(|t| format!("q{t}")).join(", "),
                self.outputs[i].literal()
            )?;
        }
        Ok(())
    }
}
