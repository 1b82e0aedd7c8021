//! Small named graphs used by tests, the acceptance suite and the CLI corpus.

use crate::graph::{Edge, EnhancedLevelGraph, Leg, Vertex};

fn legs(vertex: &str, count: i64, order: i32) -> Vec<Leg> {
    (0..count.max(0)).map(|_| Leg::new(vertex, order)).collect()
}

fn build(vertices: Vec<Vertex>, edges: Vec<Edge>, legs: Vec<Leg>) -> EnhancedLevelGraph {
    EnhancedLevelGraph::new(vertices, edges, legs).expect("corpus graphs are well formed")
}

/// One vertex of genus `g` with the given leg orders.
pub fn smooth(g: u32, orders: &[i32]) -> EnhancedLevelGraph {
    build(vec![Vertex::new("v", g, 0)], vec![], orders.iter().map(|&m| Leg::new("v", m)).collect())
}

/// Top genus `g` with `4g-4-m` simple zeros over a genus-0 vertex holding the
/// remaining `m` simple zeros; the edge enhancement is `m + 2`.
pub fn two_level(g: u32, m: u32) -> EnhancedLevelGraph {
    let top_legs = 4 * g as i64 - 4 - m as i64;
    let mut l = legs("top", top_legs, 1);
    l.extend(legs("bot", m as i64, 1));
    build(
        vec![Vertex::new("top", g, 0), Vertex::new("bot", 0, -1)],
        vec![Edge::new("e", "top", "bot", m + 2)],
        l,
    )
}

/// Two simple zeros collided: enhancement 4.
pub fn fig1_left(g: u32) -> EnhancedLevelGraph {
    two_level(g, 2)
}

/// Three simple zeros collided: enhancement 5.
pub fn fig1_right_pair(g: u32) -> EnhancedLevelGraph {
    two_level(g, 3)
}

/// Collision of `2k` simple zeros; its canonical cover is a banana curve.
pub fn banana_target(g: u32, k: u32) -> EnhancedLevelGraph {
    two_level(g, 2 * k)
}

/// Collision of `2k+1` simple zeros; its canonical cover has one node.
pub fn compact_target(g: u32, k: u32) -> EnhancedLevelGraph {
    two_level(g, 2 * k + 1)
}

/// Top of genus `g` without legs and `2g-2` genus-0 vertices below, each
/// holding a pair of collided simple zeros.
pub fn fig2_target(g: u32) -> EnhancedLevelGraph {
    let n = 2 * g as usize - 2;
    let mut vertices = vec![Vertex::new("top", g, 0)];
    let mut edges = Vec::new();
    let mut l = Vec::new();
    for i in 1..=n {
        let b = format!("b{i}");
        vertices.push(Vertex::new(&b, 0, -1));
        edges.push(Edge::new(format!("e{i}"), "top", &b, 4));
        l.extend(legs(&b, 2, 1));
    }
    build(vertices, edges, l)
}

/// The split cover of [`fig2_target`] at `g = 3`: two genus-3 tops joined to
/// four genus-0 bottoms, each bottom carrying two double zeros.
pub fn fig2_cover() -> EnhancedLevelGraph {
    let mut vertices = vec![Vertex::new("t1", 3, 0), Vertex::new("t2", 3, 0)];
    let mut edges = Vec::new();
    let mut l = Vec::new();
    for i in 1..=4 {
        let b = format!("b{i}");
        vertices.push(Vertex::new(&b, 0, -1));
        edges.push(Edge::new(format!("e{i}a"), "t1", &b, 2));
        edges.push(Edge::new(format!("e{i}b"), "t2", &b, 2));
        l.extend(legs(&b, 2, 2));
    }
    build(vertices, edges, l)
}
