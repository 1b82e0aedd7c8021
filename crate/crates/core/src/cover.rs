//! Canonical double covers of enhanced level graphs.
//!
//! Over each vertex the cover is either connected (fiber 1) or split into two
//! sheets (fiber 2). Edges of even enhancement have two preimages with half the
//! enhancement, odd ones a single preimage carrying the full enhancement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DifferentialKind, Edge, EnhancedLevelGraph, Leg, Vertex, Violation};

/// Signature of the abelian differential on the cover.
pub fn mu_hat(mu: &[i32]) -> Result<Vec<i32>> {
    let total: i64 = mu.iter().map(|&m| m as i64).sum();
    if total.rem_euclid(2) != 0 {
        return Err(Error::Signature(format!("order sum {total} is odd")));
    }
    let mut out = Vec::new();
    for &m in mu {
        if m.rem_euclid(2) == 1 {
            out.push(m + 1);
        } else {
            out.push(m / 2);
            out.push(m / 2);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `(genus, number of marked points)` of the canonical cover.
pub fn genus_count(mu: &[i32], g: i64) -> Result<(i64, i64)> {
    let total: i64 = mu.iter().map(|&m| m as i64).sum();
    if total != 4 * g - 4 {
        return Err(Error::Signature(format!("orders sum to {total}, expected {}", 4 * g - 4)));
    }
    let s1 = mu.iter().filter(|&&m| m.rem_euclid(2) == 1).count() as i64;
    let s2 = mu.len() as i64 - s1;
    if s1 % 2 != 0 {
        return Err(Error::Signature(format!("{s1} odd orders; no double cover")));
    }
    Ok((2 * g - 1 + s1 / 2, s1 + 2 * s2))
}

/// Number of odd legs plus odd half-edges at `v`: the branch points of the
/// cover on that component.
pub fn branch_count(graph: &EnhancedLevelGraph, v: usize) -> i64 {
    let legs = graph.leg_orders_at(v).iter().filter(|&&m| m.rem_euclid(2) == 1).count() as i64;
    let halves = graph.half_edges(v).into_iter().filter(|&(e, _)| graph.kappa(e) % 2 == 1).count() as i64;
    legs + halves
}

/// A degree-two cover `source -> target` with its involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverGraph {
    target: EnhancedLevelGraph,
    source: EnhancedLevelGraph,
    vertex_map: Vec<usize>,
    edge_map: Vec<usize>,
    leg_map: Vec<usize>,
    sigma_vertex: Vec<usize>,
    sigma_edge: Vec<usize>,
    sigma_leg: Vec<usize>,
}

impl CoverGraph {
    /// Assembles a cover from index maps and checks every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        target: EnhancedLevelGraph,
        source: EnhancedLevelGraph,
        vertex_map: Vec<usize>,
        edge_map: Vec<usize>,
        leg_map: Vec<usize>,
        sigma_vertex: Vec<usize>,
        sigma_edge: Vec<usize>,
        sigma_leg: Vec<usize>,
    ) -> Result<Self> {
        let c = CoverGraph { target, source, vertex_map, edge_map, leg_map, sigma_vertex, sigma_edge, sigma_leg };
        let problems = c.invariant_failures();
        if problems.is_empty() {
            Ok(c)
        } else {
            Err(Error::Cover(problems.join("; ")))
        }
    }

    pub fn target(&self) -> &EnhancedLevelGraph {
        &self.target
    }

    pub fn source(&self) -> &EnhancedLevelGraph {
        &self.source
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    pub fn edge_map(&self) -> &[usize] {
        &self.edge_map
    }

    pub fn leg_map(&self) -> &[usize] {
        &self.leg_map
    }

    pub fn sigma_vertex(&self) -> &[usize] {
        &self.sigma_vertex
    }

    pub fn sigma_edge(&self) -> &[usize] {
        &self.sigma_edge
    }

    pub fn sigma_leg(&self) -> &[usize] {
        &self.sigma_leg
    }

    /// Source vertices over target vertex `v`.
    pub fn vertex_fiber(&self, v: usize) -> Vec<usize> {
        (0..self.vertex_map.len()).filter(|&w| self.vertex_map[w] == v).collect()
    }

    /// Source edges over target edge `e`.
    pub fn edge_fiber(&self, e: usize) -> Vec<usize> {
        (0..self.edge_map.len()).filter(|&f| self.edge_map[f] == e).collect()
    }

    pub fn is_split(&self, v: usize) -> bool {
        self.vertex_fiber(v).len() == 2
    }

    pub fn is_connected(&self) -> bool {
        self.source.is_connected()
    }

    /// Prong counts `(source edge, kappa hat)` on vertical source edges.
    pub fn prongs(&self) -> Vec<(usize, i64)> {
        (0..self.source.num_edges())
            .filter(|&e| !self.source.is_horizontal(e))
            .map(|e| (e, self.source.kappa(e)))
            .collect()
    }

    /// Every violated cover invariant, as readable messages.
    pub fn invariant_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (s, t) = (&self.source, &self.target);
        if self.vertex_map.len() != s.num_vertices()
            || self.sigma_vertex.len() != s.num_vertices()
            || self.edge_map.len() != s.num_edges()
            || self.sigma_edge.len() != s.num_edges()
            || self.leg_map.len() != s.num_legs()
            || self.sigma_leg.len() != s.num_legs()
        {
            out.push("map sizes do not match the source graph".into());
            return out;
        }
        if self.vertex_map.iter().any(|&v| v >= t.num_vertices())
            || self.edge_map.iter().any(|&e| e >= t.num_edges())
            || self.leg_map.iter().any(|&l| l >= t.num_legs())
            || self.sigma_vertex.iter().any(|&v| v >= s.num_vertices())
            || self.sigma_edge.iter().any(|&e| e >= s.num_edges())
            || self.sigma_leg.iter().any(|&l| l >= s.num_legs())
        {
            out.push("map index out of range".into());
            return out;
        }
        check_involution("vertex", &self.sigma_vertex, &self.vertex_map, &mut out);
        check_involution("edge", &self.sigma_edge, &self.edge_map, &mut out);
        check_involution("leg", &self.sigma_leg, &self.leg_map, &mut out);

        for v in 0..t.num_vertices() {
            let fiber = self.vertex_fiber(v);
            let id = t.vertex_id(v);
            let b = branch_count(t, v);
            match fiber.len() {
                1 => {
                    let want = 2 * t.genus(v) - 1 + b / 2;
                    if s.genus(fiber[0]) != want {
                        out.push(format!("vertex {id}: connected fiber has genus {}, expected {want}", s.genus(fiber[0])));
                    }
                }
                2 => {
                    if b > 0 {
                        out.push(format!("vertex {id}: branched but split"));
                    }
                    for &w in &fiber {
                        if s.genus(w) != t.genus(v) {
                            out.push(format!("vertex {id}: sheet genus differs from target"));
                        }
                    }
                }
                n => out.push(format!("vertex {id}: fiber of size {n}")),
            }
            for &w in &fiber {
                if s.level(w) != t.level(v) {
                    out.push(format!("vertex {id}: level not preserved"));
                }
            }
        }
        for e in 0..t.num_edges() {
            let fiber = self.edge_fiber(e);
            let k = t.kappa(e);
            let id = t.edge_id(e);
            let (want_len, want_k) = if k % 2 == 0 { (2, k / 2) } else { (1, k) };
            if fiber.len() != want_len {
                out.push(format!("edge {id}: {} preimages, expected {want_len}", fiber.len()));
            }
            let (tt, tb) = t.ends(e);
            for &f in &fiber {
                if s.kappa(f) != want_k {
                    out.push(format!("edge {id}: lifted enhancement {} expected {want_k}", s.kappa(f)));
                }
                let (st, sb) = s.ends(f);
                let (mt, mb) = (self.vertex_map[st], self.vertex_map[sb]);
                let straight = mt == tt && mb == tb;
                let flipped = t.is_horizontal(e) && mt == tb && mb == tt;
                if !straight && !flipped {
                    out.push(format!("edge {id}: lift has wrong endpoints"));
                }
            }
        }
        for l in 0..t.num_legs() {
            let fiber: Vec<usize> = (0..self.leg_map.len()).filter(|&x| self.leg_map[x] == l).collect();
            let m = t.legs()[l].order;
            let (want_len, want_m) = if m.rem_euclid(2) == 1 { (1, m + 1) } else { (2, m / 2) };
            if fiber.len() != want_len {
                out.push(format!("leg #{l}: {} preimages, expected {want_len}", fiber.len()));
            }
            for &x in &fiber {
                if s.legs()[x].order != want_m {
                    out.push(format!("leg #{l}: lifted order {} expected {want_m}", s.legs()[x].order));
                }
                if self.vertex_map[s.leg_vertex(x)] != t.leg_vertex(l) {
                    out.push(format!("leg #{l}: lift sits over the wrong vertex"));
                }
            }
        }
        for f in 0..s.num_edges() {
            let (a, b) = s.ends(f);
            let (c, d) = s.ends(self.sigma_edge[f]);
            let (sa, sb) = (self.sigma_vertex[a], self.sigma_vertex[b]);
            if !((sa == c && sb == d) || (sa == d && sb == c)) {
                out.push(format!("edge {}: involution does not respect endpoints", s.edge_id(f)));
            }
        }
        for x in 0..s.num_legs() {
            if s.leg_vertex(self.sigma_leg[x]) != self.sigma_vertex[s.leg_vertex(x)] {
                out.push(format!("leg #{x}: involution does not respect its vertex"));
            }
        }
        let report = s.validate_abelian();
        for v in report.violations {
            if v != Violation::Disconnected {
                out.push(format!("source: {v}"));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("cover serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCover = serde_json::from_str(text)?;
        CoverGraph::from_raw(raw)
    }

    fn to_raw(&self) -> RawCover {
        let (s, t) = (&self.source, &self.target);
        let vmap = |m: &[usize], dom: &EnhancedLevelGraph, cod: &EnhancedLevelGraph| -> BTreeMap<String, String> {
            m.iter().enumerate().map(|(i, &j)| (dom.vertex_id(i).to_string(), cod.vertex_id(j).to_string())).collect()
        };
        let emap = |m: &[usize], dom: &EnhancedLevelGraph, cod: &EnhancedLevelGraph| -> BTreeMap<String, String> {
            m.iter().enumerate().map(|(i, &j)| (dom.edge_id(i).to_string(), cod.edge_id(j).to_string())).collect()
        };
        let lmap = |m: &[usize]| -> BTreeMap<String, usize> { m.iter().enumerate().map(|(i, &j)| (i.to_string(), j)).collect() };
        RawCover {
            target: t.clone(),
            source: s.clone(),
            maps: RawMaps { vertex: vmap(&self.vertex_map, s, t), edge: emap(&self.edge_map, s, t), leg: lmap(&self.leg_map) },
            sigma: RawMaps {
                vertex: vmap(&self.sigma_vertex, s, s),
                edge: emap(&self.sigma_edge, s, s),
                leg: lmap(&self.sigma_leg),
            },
        }
    }

    fn from_raw(raw: RawCover) -> Result<Self> {
        let (s, t) = (&raw.source, &raw.target);
        let bad = |what: &str| Error::Cover(format!("{what} map is incomplete or refers to unknown ids"));
        let resolve_v = |m: &BTreeMap<String, String>, cod: &EnhancedLevelGraph, what: &str| -> Result<Vec<usize>> {
            (0..s.num_vertices())
                .map(|i| m.get(s.vertex_id(i)).and_then(|id| cod.vertex_index(id)).ok_or_else(|| bad(what)))
                .collect()
        };
        let resolve_e = |m: &BTreeMap<String, String>, cod: &EnhancedLevelGraph, what: &str| -> Result<Vec<usize>> {
            (0..s.num_edges())
                .map(|i| m.get(s.edge_id(i)).and_then(|id| cod.edge_index(id)).ok_or_else(|| bad(what)))
                .collect()
        };
        let resolve_l = |m: &BTreeMap<String, usize>, what: &str| -> Result<Vec<usize>> {
            (0..s.num_legs()).map(|i| m.get(&i.to_string()).copied().ok_or_else(|| bad(what))).collect()
        };
        let vertex_map = resolve_v(&raw.maps.vertex, t, "vertex")?;
        let edge_map = resolve_e(&raw.maps.edge, t, "edge")?;
        let leg_map = resolve_l(&raw.maps.leg, "leg")?;
        let sigma_vertex = resolve_v(&raw.sigma.vertex, s, "sigma vertex")?;
        let sigma_edge = resolve_e(&raw.sigma.edge, s, "sigma edge")?;
        let sigma_leg = resolve_l(&raw.sigma.leg, "sigma leg")?;
        CoverGraph::new(raw.target, raw.source, vertex_map, edge_map, leg_map, sigma_vertex, sigma_edge, sigma_leg)
    }
}

fn check_involution(what: &str, sigma: &[usize], map: &[usize], out: &mut Vec<String>) {
    for (i, &j) in sigma.iter().enumerate() {
        if sigma[j] != i {
            out.push(format!("{what} involution is not an involution at #{i}"));
        }
        if map[j] != map[i] {
            out.push(format!("{what} involution does not commute with the projection at #{i}"));
        }
    }
    for i in 0..sigma.len() {
        let fiber = map.iter().filter(|&&x| x == map[i]).count();
        let fixed = sigma[i] == i;
        if (fiber == 1) != fixed {
            out.push(format!("{what} involution must swap two-element fibers and fix singletons (#{i})"));
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaps {
    vertex: BTreeMap<String, String>,
    edge: BTreeMap<String, String>,
    leg: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCover {
    target: EnhancedLevelGraph,
    source: EnhancedLevelGraph,
    maps: RawMaps,
    sigma: RawMaps,
}

/// Fiber-size options per target vertex: branched vertices must be connected,
/// unbranched ones may split, and may stay connected when of positive genus.
pub fn fiber_options(graph: &EnhancedLevelGraph) -> Vec<Vec<u8>> {
    (0..graph.num_vertices())
        .map(|v| {
            if branch_count(graph, v) > 0 {
                vec![1]
            } else if graph.genus(v) >= 1 {
                vec![1, 2]
            } else {
                vec![2]
            }
        })
        .collect()
}

/// Split-split edges for a fiber assignment, and which of them lie on a
/// spanning forest of the split subgraph.
fn split_edges(graph: &EnhancedLevelGraph, fibers: &[u8]) -> (Vec<usize>, Vec<bool>) {
    let mut uf = crate::graph::UnionFind::new(graph.num_vertices());
    let mut edges = Vec::new();
    let mut tree = Vec::new();
    for e in 0..graph.num_edges() {
        let (a, b) = graph.ends(e);
        if graph.kappa(e) % 2 == 0 && fibers[a] == 2 && fibers[b] == 2 {
            edges.push(e);
            tree.push(uf.union(a, b));
        }
    }
    (edges, tree)
}

/// Both counts of double covers over `graph`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoverCount {
    /// Sheet matchings counted individually on every edge joining split vertices.
    pub labeled: u64,
    /// Classes up to isomorphism over the target.
    pub up_to_isomorphism: u64,
}

pub fn count_double_covers(graph: &EnhancedLevelGraph) -> Result<CoverCount> {
    require_valid(graph)?;
    let mut labeled = 0u64;
    let mut classes = 0u64;
    for fibers in fiber_assignments(graph) {
        let (edges, tree) = split_edges(graph, &fibers);
        let free = tree.iter().filter(|&&t| !t).count();
        labeled += 1u64 << edges.len();
        classes += 1u64 << free;
    }
    Ok(CoverCount { labeled, up_to_isomorphism: classes })
}

fn require_valid(graph: &EnhancedLevelGraph) -> Result<()> {
    let report = graph.validate();
    if report.ok() {
        Ok(())
    } else {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        Err(Error::Invalid(msgs.join("; ")))
    }
}

fn fiber_assignments(graph: &EnhancedLevelGraph) -> Vec<Vec<u8>> {
    let options = fiber_options(graph);
    let mut out = vec![Vec::new()];
    for opts in &options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for &o in opts {
                let mut p = prefix.clone();
                p.push(o);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All double covers of a valid graph up to isomorphism over the target.
///
/// Sheets of split vertices are matched straight along a spanning forest of
/// the split subgraph; the remaining split-split edges range over both
/// matchings. Output order: fiber assignment (connected before split, by
/// vertex order), then crossing pattern.
pub fn enumerate_double_covers(graph: &EnhancedLevelGraph) -> Result<Vec<CoverGraph>> {
    require_valid(graph)?;
    let mut out = Vec::new();
    for fibers in fiber_assignments(graph) {
        let (edges, tree) = split_edges(graph, &fibers);
        let free: Vec<usize> = edges.iter().zip(&tree).filter(|(_, &t)| !t).map(|(&e, _)| e).collect();
        for bits in 0u64..(1u64 << free.len()) {
            let mut crossed = vec![false; graph.num_edges()];
            for (i, &e) in free.iter().enumerate() {
                crossed[e] = bits >> i & 1 == 1;
            }
            out.push(build_cover(graph, &fibers, &crossed)?);
        }
    }
    Ok(out)
}

/// Builds the cover with the given fiber sizes and crossing pattern.
pub fn build_cover(graph: &EnhancedLevelGraph, fibers: &[u8], crossed: &[bool]) -> Result<CoverGraph> {
    let mut vertices = Vec::new();
    let mut vertex_map = Vec::new();
    let mut sigma_vertex = Vec::new();
    let mut sheets: Vec<[usize; 2]> = Vec::new();
    for v in 0..graph.num_vertices() {
        let src = &graph.vertices()[v];
        let i = vertices.len();
        if fibers[v] == 1 {
            let genus = 2 * graph.genus(v) - 1 + branch_count(graph, v) / 2;
            if genus < 0 {
                return Err(Error::Cover(format!("vertex {} cannot carry a connected unbranched cover", src.id)));
            }
            vertices.push(Vertex::new(src.id.clone(), genus as u32, src.level));
            vertex_map.push(v);
            sigma_vertex.push(i);
            sheets.push([i, i]);
        } else {
            vertices.push(Vertex::new(format!("{}.1", src.id), src.genus, src.level));
            vertices.push(Vertex::new(format!("{}.2", src.id), src.genus, src.level));
            vertex_map.extend([v, v]);
            sigma_vertex.extend([i + 1, i]);
            sheets.push([i, i + 1]);
        }
    }
    let vid = |i: usize, vs: &[Vertex]| vs[i].id.clone();
    let mut edges = Vec::new();
    let mut edge_map = Vec::new();
    let mut sigma_edge = Vec::new();
    for e in 0..graph.num_edges() {
        let src = &graph.edges()[e];
        let (t, b) = graph.ends(e);
        let k = graph.kappa(e);
        let i = edges.len();
        if k % 2 == 1 {
            edges.push(Edge::new(src.id.clone(), vid(sheets[t][0], &vertices), vid(sheets[b][0], &vertices), k as u32));
            edge_map.push(e);
            sigma_edge.push(i);
        } else {
            let c = usize::from(crossed[e]);
            for s in 0..2 {
                let top = sheets[t][s];
                let bottom = sheets[b][s ^ c];
                edges.push(Edge::new(
                    format!("{}.{}", src.id, s + 1),
                    vid(top, &vertices),
                    vid(bottom, &vertices),
                    (k / 2) as u32,
                ));
            }
            edge_map.extend([e, e]);
            sigma_edge.extend([i + 1, i]);
        }
    }
    let mut legs = Vec::new();
    let mut leg_map = Vec::new();
    let mut sigma_leg = Vec::new();
    for l in 0..graph.num_legs() {
        let m = graph.legs()[l].order;
        let v = graph.leg_vertex(l);
        let i = legs.len();
        if m.rem_euclid(2) == 1 {
            legs.push(Leg::new(vid(sheets[v][0], &vertices), m + 1));
            leg_map.push(l);
            sigma_leg.push(i);
        } else {
            legs.push(Leg::new(vid(sheets[v][0], &vertices), m / 2));
            legs.push(Leg::new(vid(sheets[v][1], &vertices), m / 2));
            leg_map.extend([l, l]);
            sigma_leg.extend([i + 1, i]);
        }
    }
    let source = EnhancedLevelGraph::new(vertices, edges, legs)?;
    CoverGraph::new(graph.clone(), source, vertex_map, edge_map, leg_map, sigma_vertex, sigma_edge, sigma_leg)
}

/// Abelian order sum at each source vertex minus `2g - 2`; all zero for a
/// valid cover.
pub fn abelian_defects(cover: &CoverGraph) -> Vec<i64> {
    let s = cover.source();
    (0..s.num_vertices()).map(|v| s.order_sum(v, DifferentialKind::Abelian) - (2 * s.genus(v) - 2)).collect()
}
