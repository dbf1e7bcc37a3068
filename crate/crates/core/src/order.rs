//! The order graph and the order problem.

use std::collections::VecDeque;

use crate::classify::{orbit_signalizer, OrbitSignalizer, OsEdge};
use crate::graph::scc;
use crate::group::{Element, Group};

/// The orbit-signalizer read as a labeled graph `b --m--> b^m|_x`.
#[derive(Debug, Clone)]
pub struct OrderGraph {
    pub os: OrbitSignalizer,
}

impl OrderGraph {
    pub fn vertices(&self) -> &[Element] {
        &self.os.elements
    }

    pub fn edges(&self) -> &[OsEdge] {
        &self.os.edges
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderResult {
    Finite(u128),
    /// A cycle of vertex indices (first vertex repeated implicitly) with the
    /// labels of its edges; at least one label is at least 2.
    Infinite { cycle: Vec<usize>, labels: Vec<usize> },
    Unknown(usize),
}

/// `None` when the orbit-signalizer exceeds `cap`.
pub fn order_graph(group: &mut Group, a: &Element, cap: usize) -> Option<OrderGraph> {
    let os = orbit_signalizer(group, a, cap);
    os.is_complete().then_some(OrderGraph { os })
}

pub fn order(group: &mut Group, a: &Element, cap: usize) -> OrderResult {
    match order_graph(group, a, cap) {
        Some(g) => order_of_graph(&g),
        None => OrderResult::Unknown(cap),
    }
}

pub fn order_of_graph(graph: &OrderGraph) -> OrderResult {
    let n = graph.os.len();
    // restrict to vertices reachable from the root along representative edges
    let mut reach = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    reach[0] = true;
    while let Some(v) = queue.pop_front() {
        for e in graph.os.edges_from(v) {
            if !reach[e.target] {
                reach[e.target] = true;
                queue.push_back(e.target);
            }
        }
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if reach[v] {
                graph.os.edges_from(v).map(|e| e.target).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let (comp, count) = scc(&adj);

    for e in graph.edges() {
        if reach[e.source] && comp[e.source] == comp[e.target] && e.label >= 2 {
            let (cycle, labels) = cycle_through(graph, &comp, e);
            return OrderResult::Infinite { cycle, labels };
        }
    }

    // components are numbered sinks first
    let mut ord = vec![1u128; count];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for v in (0..n).filter(|&v| reach[v]) {
        members[comp[v]].push(v);
    }
    for c in 0..count {
        let mut acc = 1u128;
        for &v in &members[c] {
            for e in graph.os.edges_from(v) {
                if comp[e.target] != c {
                    acc = lcm(acc, (e.label as u128).saturating_mul(ord[comp[e.target]]));
                }
            }
        }
        ord[c] = acc;
    }
    OrderResult::Finite(ord[comp[0]])
}

/// A cycle inside one component that uses the edge `e`.
fn cycle_through(graph: &OrderGraph, comp: &[usize], e: &OsEdge) -> (Vec<usize>, Vec<usize>) {
    let c = comp[e.source];
    let n = graph.os.len();
    // shortest path from e.target back to e.source inside the component
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([e.target]);
    seen[e.target] = true;
    while let Some(v) = queue.pop_front() {
        if v == e.source {
            break;
        }
        for f in graph.os.edges_from(v) {
            if comp[f.target] == c && !seen[f.target] {
                seen[f.target] = true;
                parent[f.target] = Some((v, f.label));
                queue.push_back(f.target);
            }
        }
    }
    let mut path = Vec::new();
    let mut labels = Vec::new();
    let mut v = e.source;
    while v != e.target {
        let (p, l) = parent[v].expect("path inside a strongly connected component");
        path.push(v);
        labels.push(l);
        v = p;
    }
    path.push(e.target);
    path.reverse();
    labels.reverse();
    // path runs target .. source; close with e
    let mut cycle = vec![e.source];
    let mut cycle_labels = vec![e.label];
    if e.target != e.source {
        cycle.extend(path.iter().copied().take(path.len() - 1));
        cycle_labels.extend(labels);
    }
    (cycle, cycle_labels)
}

pub(crate) fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b)).saturating_mul(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcm_gcd() {
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(lcm(1, 7), 7);
        assert_eq!(gcd(12, 18), 6);
    }

    #[test]
    fn small_orders() {
        let mut g = Group::parse("alphabet 2\ns = (e, e) [1 0]\nc = (c, s)\na = (e, a) [1 0]").unwrap();
        let c = g.element("c").unwrap();
        let a = g.element("a").unwrap();
        let s = g.element("s").unwrap();
        assert_eq!(order(&mut g, &c, 100), OrderResult::Finite(2));
        assert_eq!(order(&mut g, &s, 100), OrderResult::Finite(2));
        assert_eq!(order(&mut g, &Element::identity(), 100), OrderResult::Finite(1));
        match order(&mut g, &a, 100) {
            OrderResult::Infinite { cycle, labels } => {
                assert_eq!(cycle, vec![0]);
                assert_eq!(labels, vec![2]);
            }
            other => panic!("{other:?}"),
        }
    }
}
