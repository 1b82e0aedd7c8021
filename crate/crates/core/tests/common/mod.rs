#![allow(dead_code)]

use std::collections::BTreeSet;

use levelgraph_core::collision::enumerate_collision_graphs;
use levelgraph_core::cover::{enumerate_double_covers, CoverGraph};
use levelgraph_core::graph::{Edge, EnhancedLevelGraph, Leg, Vertex};
use levelgraph_core::rational::Q;
use levelgraph_core::symmetry::canonical_code;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One level, horizontal edges; leg orders are irrelevant here.
pub fn flat_graph(genera: &[u32], pairs: &[(usize, usize)], legs: &[usize]) -> Option<EnhancedLevelGraph> {
    let vertices = genera.iter().enumerate().map(|(i, &g)| Vertex::new(format!("v{i}"), g, 0)).collect();
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| Edge::new(format!("e{i}"), format!("v{a}"), format!("v{b}"), 0))
        .collect();
    let legs = legs.iter().map(|&v| Leg::new(format!("v{v}"), 1)).collect();
    EnhancedLevelGraph::new(vertices, edges, legs).ok()
}

fn is_stable(graph: &EnhancedLevelGraph) -> bool {
    (0..graph.num_vertices()).all(|v| 2 * graph.genus(v) - 2 + graph.valence(v) + graph.legs_at(v) > 0)
}

fn multisets<T: Clone>(items: &[T], size: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        cur.push(items[i].clone());
        multisets(items, size, i, cur, out);
        cur.pop();
    }
}

/// Every connected stable graph of arithmetic genus `g` with `n` legs and at
/// most `max_vertices` vertices, up to isomorphism.
pub fn stable_graphs(g: u32, n: usize, max_vertices: usize) -> Vec<EnhancedLevelGraph> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v_count in 1..=max_vertices {
        let pairs: Vec<(usize, usize)> =
            (0..v_count).flat_map(|a| (a..v_count).map(move |b| (a, b))).collect();
        let mut leg_sets = Vec::new();
        multisets(&(0..v_count).collect::<Vec<_>>(), n, 0, &mut Vec::new(), &mut leg_sets);
        let mut genera_sets = Vec::new();
        let mut genera = vec![0u32; v_count];
        loop {
            if genera.iter().sum::<u32>() <= g {
                genera_sets.push(genera.clone());
            }
            let mut i = 0;
            while i < v_count {
                if genera[i] < g {
                    genera[i] += 1;
                    break;
                }
                genera[i] = 0;
                i += 1;
            }
            if i == v_count {
                break;
            }
        }
        for genera in &genera_sets {
            let e_count = (g - genera.iter().sum::<u32>()) as usize + v_count - 1;
            let mut edge_sets = Vec::new();
            multisets(&pairs, e_count, 0, &mut Vec::new(), &mut edge_sets);
            for edges in &edge_sets {
                for legs in &leg_sets {
                    let Some(graph) = flat_graph(genera, edges, legs) else { continue };
                    if !graph.is_connected() || !is_stable(&graph) {
                        continue;
                    }
                    if seen.insert(canonical_code(&graph)) {
                        out.push(graph);
                    }
                }
            }
        }
    }
    out
}

/// A random connected stable graph with at most `max_v` vertices and
/// `max_e` edges.
pub fn random_stable_graph(rng: &mut ChaCha8Rng, max_v: usize, max_e: usize, max_legs: usize) -> EnhancedLevelGraph {
    loop {
        let v_count = rng.gen_range(1..=max_v);
        let genera: Vec<u32> = (0..v_count).map(|_| rng.gen_range(0..=2)).collect();
        let mut pairs: Vec<(usize, usize)> = (1..v_count).map(|b| (rng.gen_range(0..b), b)).collect();
        let extra = rng.gen_range(0..=max_e.saturating_sub(pairs.len()));
        for _ in 0..extra {
            let a = rng.gen_range(0..v_count);
            let b = rng.gen_range(0..v_count);
            pairs.push((a.min(b), a.max(b)));
        }
        let legs: Vec<usize> = (0..rng.gen_range(0..=max_legs)).map(|_| rng.gen_range(0..v_count)).collect();
        if let Some(graph) = flat_graph(&genera, &pairs, &legs) {
            if is_stable(&graph) && graph.arithmetic_genus().unwrap() >= 1 {
                return graph;
            }
        }
    }
}

/// Arithmetic genus, boundary size and number of legs of a subcurve, counted
/// directly from the edge list.
pub fn subcurve_data(graph: &EnhancedLevelGraph, mask: u64) -> (i64, i64, i64) {
    let inside = |v: usize| mask >> v & 1 == 1;
    let mut boundary = 0;
    let mut interior = 0;
    for e in graph.edges() {
        let a = graph.vertex_index(&e.top).unwrap();
        let b = graph.vertex_index(&e.bottom).unwrap();
        match (inside(a), inside(b)) {
            (true, true) => interior += 1,
            (true, false) | (false, true) => boundary += 1,
            _ => {}
        }
    }
    let members: Vec<usize> = (0..graph.num_vertices()).filter(|&v| inside(v)).collect();
    // Components of the induced subgraph.
    let mut parent: Vec<usize> = (0..graph.num_vertices()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for e in graph.edges() {
        let a = graph.vertex_index(&e.top).unwrap();
        let b = graph.vertex_index(&e.bottom).unwrap();
        if inside(a) && inside(b) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let comps: BTreeSet<usize> = members.iter().map(|&v| find(&mut parent, v)).collect();
    let genus: i64 = members.iter().map(|&v| graph.genus(v)).sum::<i64>() + interior - members.len() as i64
        + comps.len() as i64;
    let legs = graph.legs().iter().filter(|l| inside(graph.vertex_index(&l.vertex).unwrap())).count() as i64;
    (genus, boundary, legs)
}

/// Canonical threshold of a connected-or-not subcurve from its genus data:
/// `(d - g + 1) w / (2g - 2 + n) + g_Y - c_Y`, with `w = 2 g_Y - 2 c_Y + b + n_Y`
/// summed over the `c_Y` components.
pub fn oracle_threshold(graph: &EnhancedLevelGraph, d: i64, mask: u64) -> Q {
    let g = graph.arithmetic_genus().unwrap();
    let n = graph.num_legs() as i64;
    let members: Vec<usize> = (0..graph.num_vertices()).filter(|&v| mask >> v & 1 == 1).collect();
    // Sum of (2 g_v - 2 + val_v) over the members, from the edge list.
    let mut omega: i64 = members.iter().map(|&v| 2 * graph.genus(v) - 2).sum();
    for e in graph.edges() {
        let a = graph.vertex_index(&e.top).unwrap();
        let b = graph.vertex_index(&e.bottom).unwrap();
        omega += i64::from(mask >> a & 1 == 1) + i64::from(mask >> b & 1 == 1);
    }
    let (_, boundary, legs) = subcurve_data(graph, mask);
    Q::new((d - g + 1) * (omega + legs), 2 * g - 2 + n) + Q::new(omega - boundary, 2)
}

/// Covers of collision graphs at genus 2 (all) and 3 (up to three levels).
pub fn collision_covers() -> Vec<CoverGraph> {
    let mut out = Vec::new();
    for (g, levels) in [(2, 4), (3, 3)] {
        for graph in enumerate_collision_graphs(g, levels) {
            out.extend(enumerate_double_covers(&graph).unwrap());
        }
    }
    out
}

/// A random source multidegree class on `cover` and a `deg L` that matches
/// the total degree most of the time.
pub fn random_spectral_instance(rng: &mut ChaCha8Rng, cover: &CoverGraph) -> (levelgraph_core::polarization::MultidegreeClass, i64) {
    let s = cover.source();
    let g = cover.target().arithmetic_genus().unwrap();
    let degrees: Vec<i64> = (0..s.num_vertices()).map(|_| rng.gen_range(-3..=6)).collect();
    let ns: BTreeSet<usize> = (0..s.num_edges()).filter(|_| rng.gen_bool(0.2)).collect();
    let class = levelgraph_core::polarization::MultidegreeClass::new(s, degrees, ns).unwrap();
    let shift = if rng.gen_bool(0.75) { 0 } else { rng.gen_range(-2..=2) };
    let deg_l = class.total() - 2 * g + 2 + shift;
    (class, deg_l)
}
