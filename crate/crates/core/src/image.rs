//! Necessary combinatorial conditions for a stable graph with an involution
//! to arise as the source of a canonical double cover of a principal-type
//! quadratic differential.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, EnhancedLevelGraph, Vertex};

const NODE_BUDGET: u64 = 20_000_000;
const MAX_ORBITS: usize = 8;

/// A candidate involution, as vertex and edge permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    pub vertex: Vec<usize>,
    pub edge: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInvolution {
    #[serde(default)]
    vertex: BTreeMap<String, String>,
    #[serde(default)]
    edge: BTreeMap<String, String>,
}

impl Involution {
    pub fn identity(graph: &EnhancedLevelGraph) -> Self {
        Involution { vertex: (0..graph.num_vertices()).collect(), edge: (0..graph.num_edges()).collect() }
    }

    /// Reads `{"vertex": {id: id}, "edge": {id: id}}`; ids not listed are fixed.
    pub fn from_json(graph: &EnhancedLevelGraph, text: &str) -> Result<Self> {
        let raw: RawInvolution = serde_json::from_str(text)?;
        let mut out = Involution::identity(graph);
        for (a, b) in &raw.vertex {
            let find = |id: &str| {
                graph
                    .vertex_index(id)
                    .ok_or_else(|| Error::UnknownVertex { owner: "involution".into(), vertex: id.into() })
            };
            out.vertex[find(a)?] = find(b)?;
        }
        for (a, b) in &raw.edge {
            let find = |id: &str| graph.edge_index(id).ok_or_else(|| Error::UnknownEdge(id.into()));
            out.edge[find(a)?] = find(b)?;
        }
        Ok(out)
    }

    fn check(&self, graph: &EnhancedLevelGraph) -> Result<()> {
        let bad = |why: String| Err(Error::NotAnAutomorphism(why));
        if self.vertex.len() != graph.num_vertices() || self.edge.len() != graph.num_edges() {
            return bad("wrong number of entries".into());
        }
        for (v, &w) in self.vertex.iter().enumerate() {
            if w >= self.vertex.len() || self.vertex[w] != v {
                return bad(format!("vertex {} is not mapped involutively", graph.vertex_id(v)));
            }
            if graph.genus(v) != graph.genus(w) {
                return bad(format!("vertex {} changes genus", graph.vertex_id(v)));
            }
        }
        for (e, &f) in self.edge.iter().enumerate() {
            if f >= self.edge.len() || self.edge[f] != e {
                return bad(format!("edge {} is not mapped involutively", graph.edge_id(e)));
            }
            let (a, b) = graph.ends(e);
            let (c, d) = graph.ends(f);
            let (a, b) = (self.vertex[a], self.vertex[b]);
            if !((a == c && b == d) || (a == d && b == c)) {
                return bad(format!("edge {} is not sent to an edge between the image vertices", graph.edge_id(e)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageVerdict {
    PassNecessary,
    Fail,
}

/// The outcome, with a level structure, enhancements and double-zero counts
/// when the check passes. Vertices and edges refer to the graph after fixed
/// self-nodes were replaced by bridges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageCertificate {
    pub verdict: ImageVerdict,
    pub level_structures_checked: usize,
    pub levels: BTreeMap<String, i32>,
    pub kappa: BTreeMap<String, u32>,
    pub double_zeros: BTreeMap<String, i64>,
    pub reason: Option<String>,
}

/// Replaces every loop fixed by the involution with a rational vertex joined
/// by two edges.
fn bridge_fixed_loops(graph: &EnhancedLevelGraph, sigma: &Involution) -> Result<(EnhancedLevelGraph, Involution)> {
    let mut vertices: Vec<Vertex> = graph.vertices().to_vec();
    let mut edges: Vec<Edge> = Vec::new();
    let mut vmap: Vec<usize> = sigma.vertex.clone();
    let mut new_index = BTreeMap::new();
    for e in 0..graph.num_edges() {
        let edge = &graph.edges()[e];
        if graph.is_loop(e) && sigma.edge[e] == e {
            let id = format!("{}.bridge", edge.id);
            vertices.push(Vertex::new(&id, 0, edge_level(graph, e)));
            vmap.push(vertices.len() - 1);
            for side in ["a", "b"] {
                new_index.insert(format!("{}.{side}", edge.id), edges.len());
                edges.push(Edge::new(format!("{}.{side}", edge.id), edge.top.clone(), id.clone(), 1));
            }
        } else {
            new_index.insert(edge.id.clone(), edges.len());
            edges.push(Edge::new(edge.id.clone(), edge.top.clone(), edge.bottom.clone(), edge.kappa));
        }
    }
    let mut emap = vec![0; edges.len()];
    for e in 0..graph.num_edges() {
        let id = &graph.edges()[e].id;
        if let Some(&i) = new_index.get(id) {
            emap[i] = new_index[&graph.edges()[sigma.edge[e]].id];
        } else {
            for side in ["a", "b"] {
                let i = new_index[&format!("{id}.{side}")];
                emap[i] = i;
            }
        }
    }
    let out = EnhancedLevelGraph::new(vertices, edges, Vec::new())?;
    Ok((out, Involution { vertex: vmap, edge: emap }))
}

fn edge_level(graph: &EnhancedLevelGraph, e: usize) -> i32 {
    graph.level(graph.ends(e).0)
}

fn orbits(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for i in 0..perm.len() {
        if !seen[i] {
            seen[i] = true;
            seen[perm[i]] = true;
            out.push(if perm[i] == i { vec![i] } else { vec![i, perm[i]] });
        }
    }
    out
}

/// Ordered set partitions of `items` into non-empty blocks.
fn ordered_partitions(items: &[usize], f: &mut dyn FnMut(&[Vec<usize>]) -> bool) -> bool {
    fn rec(rest: &[usize], blocks: &mut Vec<Vec<usize>>, f: &mut dyn FnMut(&[Vec<usize>]) -> bool) -> bool {
        let Some((&x, tail)) = rest.split_first() else { return f(blocks) };
        for i in 0..blocks.len() {
            blocks[i].push(x);
            let stop = rec(tail, blocks, f);
            blocks[i].pop();
            if stop {
                return true;
            }
        }
        for i in 0..=blocks.len() {
            blocks.insert(i, vec![x]);
            let stop = rec(tail, blocks, f);
            blocks.remove(i);
            if stop {
                return true;
            }
        }
        false
    }
    rec(items, &mut Vec::new(), f)
}

struct Search<'a> {
    graph: &'a EnhancedLevelGraph,
    fixed: Vec<bool>,
    rhs: Vec<i64>,
    bound: i64,
    edge_orbits: Vec<Vec<usize>>,
    budget: u64,
}

impl Search<'_> {
    /// Finds enhancements for a level function, or `None`.
    fn solve(&mut self, level: &[i32]) -> Result<Option<(Vec<u32>, Vec<i64>)>> {
        let g = self.graph;
        let n = g.num_vertices();
        // For each vertex: sum of kappa at upper ends minus lower ends.
        let mut kappa = vec![0u32; g.num_edges()];
        let mut net = vec![0i64; n];
        let mut up_left = vec![0i64; n];
        let mut low_left = vec![0i64; n];
        let orient = |e: usize| {
            let (a, b) = g.ends(e);
            match level[a].cmp(&level[b]) {
                std::cmp::Ordering::Greater => Some((a, b)),
                std::cmp::Ordering::Less => Some((b, a)),
                std::cmp::Ordering::Equal => None,
            }
        };
        let vertical: Vec<usize> = (0..self.edge_orbits.len()).filter(|&o| orient(self.edge_orbits[o][0]).is_some()).collect();
        for &o in &vertical {
            for &e in &self.edge_orbits[o] {
                let (t, b) = orient(e).unwrap();
                up_left[t] += 1;
                low_left[b] += 1;
            }
        }
        let (rhs, fixed) = (self.rhs.clone(), self.fixed.clone());
        let ok_vertex = |v: usize, net: &[i64], up_left: &[i64], low_left: &[i64], bound: i64| {
            let rest = rhs[v] - net[v];
            if up_left[v] == 0 && low_left[v] == 0 {
                rest >= 0 && rest % 2 == 0 && (fixed[v] || rest == 0)
            } else {
                rest - up_left[v] + bound * low_left[v] >= 0
            }
        };
        for v in 0..n {
            if !ok_vertex(v, &net, &up_left, &low_left, self.bound) {
                return Ok(None);
            }
        }
        fn rec(
            s: &mut Search,
            i: usize,
            vertical: &[usize],
            orient: &dyn Fn(usize) -> Option<(usize, usize)>,
            kappa: &mut [u32],
            net: &mut [i64],
            up_left: &mut [i64],
            low_left: &mut [i64],
            ok_vertex: &dyn Fn(usize, &[i64], &[i64], &[i64], i64) -> bool,
        ) -> Result<bool> {
            if i == vertical.len() {
                return Ok(true);
            }
            let members = s.edge_orbits[vertical[i]].clone();
            for k in 1..=s.bound {
                if s.budget == 0 {
                    return Err(Error::SearchTooLarge("enhancement search exceeded its budget".into()));
                }
                s.budget -= 1;
                let mut touched = Vec::new();
                for &e in &members {
                    let (t, b) = orient(e).unwrap();
                    kappa[e] = k as u32;
                    net[t] += k;
                    net[b] -= k;
                    up_left[t] -= 1;
                    low_left[b] -= 1;
                    touched.extend([t, b]);
                }
                let good = touched.iter().all(|&v| ok_vertex(v, net, up_left, low_left, s.bound));
                if good && rec(s, i + 1, vertical, orient, kappa, net, up_left, low_left, ok_vertex)? {
                    return Ok(true);
                }
                for &e in &members {
                    let (t, b) = orient(e).unwrap();
                    kappa[e] = 0;
                    net[t] -= k;
                    net[b] += k;
                    up_left[t] += 1;
                    low_left[b] += 1;
                }
            }
            Ok(false)
        }
        let found = rec(self, 0, &vertical, &orient, &mut kappa, &mut net, &mut up_left, &mut low_left, &ok_vertex)?;
        if !found {
            return Ok(None);
        }
        let zeros = (0..n).map(|v| (rhs[v] - net[v]) / 2).collect();
        Ok(Some((kappa, zeros)))
    }
}

/// Checks the necessary image conditions. Legs, levels and enhancements of the
/// input are ignored; only the stable graph and the involution matter.
pub fn check_rank2_image_conditions(
    graph: &EnhancedLevelGraph,
    sigma: &Involution,
    bridge_loops: bool,
) -> Result<ImageCertificate> {
    sigma.check(graph)?;
    let (graph, sigma) = if bridge_loops { bridge_fixed_loops(graph, sigma)? } else { (graph.clone(), sigma.clone()) };
    let n = graph.num_vertices();
    let vertex_orbits = orbits(&sigma.vertex);
    if vertex_orbits.len() > MAX_ORBITS {
        return Err(Error::SearchTooLarge(format!("{} vertex orbits", vertex_orbits.len())));
    }
    let rhs: Vec<i64> = (0..n).map(|v| 2 * graph.genus(v) - 2 + graph.valence(v)).collect();
    let mut search = Search {
        graph: &graph,
        fixed: (0..n).map(|v| sigma.vertex[v] == v).collect(),
        bound: rhs.iter().filter(|&&x| x > 0).sum::<i64>().max(1),
        rhs,
        edge_orbits: orbits(&sigma.edge),
        budget: NODE_BUDGET,
    };
    let mut checked = 0usize;
    let mut found: Option<(Vec<i32>, Vec<u32>, Vec<i64>)> = None;
    let mut failure: Option<Error> = None;
    for top in 0..vertex_orbits.len() {
        let rest: Vec<usize> = (0..vertex_orbits.len()).filter(|&o| o != top).collect();
        let stop = ordered_partitions(&rest, &mut |blocks| {
            checked += 1;
            let mut level = vec![0i32; n];
            for (depth, block) in blocks.iter().enumerate() {
                for &o in block {
                    for &v in &vertex_orbits[o] {
                        level[v] = -(depth as i32) - 1;
                    }
                }
            }
            match search.solve(&level) {
                Ok(Some((kappa, zeros))) => {
                    found = Some((level, kappa, zeros));
                    true
                }
                Ok(None) => false,
                Err(e) => {
                    failure = Some(e);
                    true
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if stop {
            break;
        }
    }
    let mut cert = ImageCertificate {
        verdict: ImageVerdict::Fail,
        level_structures_checked: checked,
        levels: BTreeMap::new(),
        kappa: BTreeMap::new(),
        double_zeros: BTreeMap::new(),
        reason: None,
    };
    match found {
        Some((level, kappa, zeros)) => {
            cert.verdict = ImageVerdict::PassNecessary;
            for v in 0..n {
                cert.levels.insert(graph.vertex_id(v).to_string(), level[v]);
                cert.double_zeros.insert(graph.vertex_id(v).to_string(), zeros[v]);
            }
            for e in 0..graph.num_edges() {
                cert.kappa.insert(graph.edge_id(e).to_string(), kappa[e]);
            }
        }
        None => {
            cert.reason = Some(format!(
                "none of the {checked} invariant level structures with a single top orbit admits enhancements"
            ));
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::graph::Leg;

    #[test]
    fn smooth_passes() {
        let g = corpus::smooth(9, &[]);
        let cert = check_rank2_image_conditions(&g, &Involution::identity(&g), true).unwrap();
        assert_eq!(cert.verdict, ImageVerdict::PassNecessary);
        assert_eq!(cert.double_zeros["v"], 8);
    }

    fn figure_two_swap(g: &EnhancedLevelGraph) -> Involution {
        let mut sigma = Involution::identity(g);
        let (t1, t2) = (g.vertex_index("t1").unwrap(), g.vertex_index("t2").unwrap());
        sigma.vertex[t1] = t2;
        sigma.vertex[t2] = t1;
        for i in 1..=4 {
            let a = g.edge_index(&format!("e{i}a")).unwrap();
            let b = g.edge_index(&format!("e{i}b")).unwrap();
            sigma.edge[a] = b;
            sigma.edge[b] = a;
        }
        sigma
    }

    /// Re-checks the vertex equations of a certificate on an edge-free
    /// reading of the graph.
    fn certificate_holds(g: &EnhancedLevelGraph, cert: &ImageCertificate) -> bool {
        (0..g.num_vertices()).all(|v| {
            let id = g.vertex_id(v);
            let mut lhs = 2 * cert.double_zeros[id];
            for &e in g.incident_edges(v) {
                let (a, b) = g.ends(e);
                let other = if a == v { b } else { a };
                let k = cert.kappa[g.edge_id(e)] as i64;
                match cert.levels[id].cmp(&cert.levels[g.vertex_id(other)]) {
                    std::cmp::Ordering::Greater => lhs += k,
                    std::cmp::Ordering::Less => lhs -= k,
                    std::cmp::Ordering::Equal => assert_eq!(k, 0),
                }
            }
            lhs == 2 * g.genus(v) - 2 + g.valence(v) && cert.double_zeros[id] >= 0
        })
    }

    #[test]
    fn figure_two_cover_passes() {
        let g = corpus::fig2_cover();
        let sigma = figure_two_swap(&g);
        let cert = check_rank2_image_conditions(&g, &sigma, true).unwrap();
        assert_eq!(cert.verdict, ImageVerdict::PassNecessary);
        assert!(certificate_holds(&g, &cert));
        assert_eq!(cert.levels["t1"], 0);
        assert_eq!(cert.levels["t2"], 0);
        assert_eq!(cert.double_zeros["t1"], 0);

        // The drawn level structure: tops over all bottoms.
        let n = g.num_vertices();
        let rhs: Vec<i64> = (0..n).map(|v| 2 * g.genus(v) - 2 + g.valence(v)).collect();
        let mut search = Search {
            graph: &g,
            fixed: (0..n).map(|v| sigma.vertex[v] == v).collect(),
            bound: 16,
            rhs,
            edge_orbits: orbits(&sigma.edge),
            budget: NODE_BUDGET,
        };
        let level: Vec<i32> = (0..n).map(|v| if g.genus(v) == 3 { 0 } else { -1 }).collect();
        let (kappa, zeros) = search.solve(&level).unwrap().unwrap();
        // Each top sees enhancements summing to 2g - 2 + val = 8; the bottoms
        // absorb them as double zeros.
        assert_eq!(kappa.iter().sum::<u32>(), 16);
        assert_eq!(zeros.iter().sum::<i64>(), 8);
    }

    #[test]
    fn unswapped_pair_fails() {
        let vertices = vec![Vertex::new("a", 0, 0), Vertex::new("b", 0, 0)];
        let edges = (0..6).map(|i| Edge::new(format!("x{i}"), "a", "b", 0)).collect();
        let g = EnhancedLevelGraph::new(vertices, edges, Vec::<Leg>::new()).unwrap();
        let cert = check_rank2_image_conditions(&g, &Involution::identity(&g), true).unwrap();
        assert_eq!(cert.verdict, ImageVerdict::Fail);
        assert_eq!(cert.level_structures_checked, 2);
    }

    #[test]
    fn non_automorphism_is_rejected() {
        let g = corpus::fig2_cover();
        let mut sigma = figure_two_swap(&g);
        sigma.edge.swap(0, 1);
        assert!(check_rank2_image_conditions(&g, &sigma, true).is_err());
        let mut half = Involution::identity(&g);
        half.vertex[0] = 1;
        assert!(check_rank2_image_conditions(&g, &half, true).is_err());
    }

    #[test]
    fn json_involution() {
        let g = corpus::fig2_cover();
        let text = r#"{"vertex": {"t1": "t2", "t2": "t1"},
            "edge": {"e1a": "e1b", "e1b": "e1a", "e2a": "e2b", "e2b": "e2a",
                     "e3a": "e3b", "e3b": "e3a", "e4a": "e4b", "e4b": "e4a"}}"#;
        assert_eq!(Involution::from_json(&g, text).unwrap(), figure_two_swap(&g));
    }

    #[test]
    fn ordered_partition_count() {
        let mut count = 0;
        ordered_partitions(&[0, 1, 2, 3], &mut |_| {
            count += 1;
            false
        });
        assert_eq!(count, 75);
    }
}
