//! Graphviz output: one ranked row per level, enhancements on edges, legs as
//! points.

use std::fmt::Write;

use crate::cover::CoverGraph;
use crate::graph::EnhancedLevelGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn body(out: &mut String, graph: &EnhancedLevelGraph, prefix: &str, clusters: Option<&[Vec<usize>]>) {
    let name = |v: usize| quote(&format!("{prefix}{}", graph.vertex_id(v)));
    match clusters {
        Some(groups) => {
            let tag = prefix.replace(|c: char| !c.is_alphanumeric(), "_");
            for (i, group) in groups.iter().enumerate() {
                let _ = writeln!(out, "  subgraph cluster_{tag}{i} {{");
                let _ = writeln!(out, "    style=dashed;");
                for &v in group {
                    let _ = writeln!(out, "    {} [label={}];", name(v), quote(&format!("{} g={}", graph.vertex_id(v), graph.genus(v))));
                }
                let _ = writeln!(out, "  }}");
            }
        }
        None => {
            for v in 0..graph.num_vertices() {
                let _ = writeln!(out, "  {} [label={}];", name(v), quote(&format!("{} g={}", graph.vertex_id(v), graph.genus(v))));
            }
        }
    }
    for level in graph.levels() {
        let members: Vec<String> = (0..graph.num_vertices()).filter(|&v| graph.level(v) == level).map(name).collect();
        let _ = writeln!(out, "  {{ rank=same; {} }}", members.join("; "));
    }
    for e in 0..graph.num_edges() {
        let (t, b) = graph.ends(e);
        let style = if graph.is_horizontal(e) { ", style=dashed, constraint=false" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, arrowhead=none{style}];",
            name(t),
            name(b),
            quote(&format!("{}:{}", graph.edge_id(e), graph.kappa(e)))
        );
    }
    for (l, leg) in graph.legs().iter().enumerate() {
        let v = graph.leg_vertex(l);
        let id = quote(&format!("{prefix}leg{l}"));
        let _ = writeln!(out, "  {id} [shape=point, xlabel={}];", quote(&leg.order.to_string()));
        let _ = writeln!(out, "  {} -> {id} [arrowhead=none];", name(v));
    }
}

pub fn graph_to_dot(graph: &EnhancedLevelGraph) -> String {
    let mut out = String::from("digraph G {\n  rankdir=TB;\n  node [shape=circle];\n");
    body(&mut out, graph, "", None);
    out.push_str("}\n");
    out
}

/// The source graph with each fiber in its own cluster, next to the target.
pub fn cover_to_dot(cover: &CoverGraph) -> String {
    let mut out = String::from("digraph Cover {\n  rankdir=TB;\n  node [shape=circle];\n");
    let fibers: Vec<Vec<usize>> = (0..cover.target().num_vertices()).map(|v| cover.vertex_fiber(v)).collect();
    body(&mut out, cover.source(), "src:", Some(&fibers));
    body(&mut out, cover.target(), "tgt:", None);
    out.push_str("}\n");
    out
}
