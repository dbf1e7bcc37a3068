//! Graphviz export of the order graph and the conjugator graph.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::conj_aut::ConjGraph;
use crate::group::Group;
use crate::order::OrderGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One node per vertex and one edge per distinct `(source, target, label)`.
pub fn order_graph_dot(group: &Group, graph: &OrderGraph) -> String {
    let mut out = String::from("digraph order {\n");
    for (i, v) in graph.vertices().iter().enumerate() {
        writeln!(out, "  n{i} [label={}];", quote(&group.display(v))).unwrap();
    }
    let mut edges: Vec<(usize, usize, usize)> = graph
        .edges()
        .iter()
        .map(|e| (e.source, e.target, e.label))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    for (s, t, l) in edges {
        writeln!(out, "  n{s} -> n{t} [label=\"{l}\"];").unwrap();
    }
    out.push_str("}\n");
    out
}

/// One node per surviving vertex; parallel edges are merged and labeled by
/// their letters.
pub fn conj_graph_dot(group: &Group, graph: &ConjGraph) -> String {
    let mut out = String::from("digraph conjugators {\n");
    for (i, v) in graph.vertices.iter().enumerate() {
        let label = format!(
            "({}, {}, {})",
            group.display(&graph.os_a.elements[v.c]),
            group.display(&graph.os_b.elements[v.d]),
            v.pi.cycle_notation()
        );
        let shape = if graph.roots.contains(&i) { ", shape=doublecircle" } else { "" };
        writeln!(out, "  v{i} [label={}{shape}];", quote(&label)).unwrap();
    }
    let mut merged: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for e in &graph.edges {
        merged.entry((e.source, e.target)).or_default().push(e.letter);
    }
    for ((s, t), mut letters) in merged {
        letters.sort_unstable();
        letters.dedup();
        let label = letters.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        writeln!(out, "  v{s} -> v{t} [label=\"{label}\"];").unwrap();
    }
    out.push_str("}\n");
    out
}

/// Number of node and edge statements of a DOT text produced here.
pub fn dot_counts(dot: &str) -> (usize, usize) {
    let edges = dot.lines().filter(|l| l.contains("->")).count();
    let nodes = dot
        .lines()
        .filter(|l| l.trim_start().starts_with(['n', 'v']) && l.contains("[label=") && !l.contains("->"))
        .count();
    (nodes, edges)
}
