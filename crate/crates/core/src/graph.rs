//! Enhanced level graphs: vertices with genus and level, edges with an
//! enhancement, legs carrying zero orders of a quadratic (or abelian)
//! differential.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count for operations that range over all subcurves.
pub const SUBSET_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
    pub level: i32,
}

/// An edge joins `top` (upper end) to `bottom` (lower end). For horizontal
/// edges the two names are interchangeable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub top: String,
    pub bottom: String,
    pub kappa: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leg {
    pub vertex: String,
    pub order: i32,
}

impl Vertex {
    pub fn new(id: impl Into<String>, genus: u32, level: i32) -> Self {
        Vertex { id: id.into(), genus, level }
    }
}

impl Edge {
    pub fn new(id: impl Into<String>, top: impl Into<String>, bottom: impl Into<String>, kappa: u32) -> Self {
        Edge { id: id.into(), top: top.into(), bottom: bottom.into(), kappa }
    }
}

impl Leg {
    pub fn new(vertex: impl Into<String>, order: i32) -> Self {
        Leg { vertex: vertex.into(), order }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: Vec<Vertex>,
    #[serde(default)]
    edges: Vec<Edge>,
    #[serde(default)]
    legs: Vec<Leg>,
}

/// Which end of an edge a half-edge sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Top,
    Bottom,
}

/// The differential whose order sums the graph is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DifferentialKind {
    /// Vertex sum `4g - 4`; half-edge orders `k-2`, `-k-2`, `-2` when horizontal.
    Quadratic,
    /// Vertex sum `2g - 2`; half-edge orders `k-1`, `-k-1`, `-1` when horizontal.
    Abelian,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct EnhancedLevelGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    legs: Vec<Leg>,
    ends: Vec<(usize, usize)>,
    leg_at: Vec<usize>,
    vertex_index: BTreeMap<String, usize>,
    edge_index: BTreeMap<String, usize>,
    incident: Vec<Vec<usize>>,
}

impl TryFrom<RawGraph> for EnhancedLevelGraph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        EnhancedLevelGraph::new(raw.vertices, raw.edges, raw.legs)
    }
}

impl From<EnhancedLevelGraph> for RawGraph {
    fn from(g: EnhancedLevelGraph) -> Self {
        RawGraph { vertices: g.vertices, edges: g.edges, legs: g.legs }
    }
}

impl EnhancedLevelGraph {
    /// Resolves references. Fails only on structural problems; invariants are
    /// checked separately by [`validate`](Self::validate).
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>, legs: Vec<Leg>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut vertex_index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(v.id.clone()));
            }
        }
        let lookup = |owner: String, id: &str| {
            vertex_index
                .get(id)
                .copied()
                .ok_or_else(|| Error::UnknownVertex { owner, vertex: id.to_string() })
        };
        let mut edge_index = BTreeMap::new();
        let mut ends = Vec::with_capacity(edges.len());
        let mut incident = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(Error::DuplicateEdge(e.id.clone()));
            }
            let t = lookup(format!("edge `{}`", e.id), &e.top)?;
            let b = lookup(format!("edge `{}`", e.id), &e.bottom)?;
            ends.push((t, b));
            incident[t].push(i);
            if b != t {
                incident[b].push(i);
            }
        }
        let mut leg_at = Vec::with_capacity(legs.len());
        for (i, l) in legs.iter().enumerate() {
            leg_at.push(lookup(format!("leg #{i}"), &l.vertex)?);
        }
        Ok(EnhancedLevelGraph { vertices, edges, legs, ends, leg_at, vertex_index, edge_index, incident })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v].id
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edges[e].id
    }

    /// `(top, bottom)` vertex indices of edge `e`.
    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    pub fn leg_vertex(&self, l: usize) -> usize {
        self.leg_at[l]
    }

    pub fn genus(&self, v: usize) -> i64 {
        self.vertices[v].genus as i64
    }

    pub fn level(&self, v: usize) -> i32 {
        self.vertices[v].level
    }

    pub fn kappa(&self, e: usize) -> i64 {
        self.edges[e].kappa as i64
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (t, b) = self.ends[e];
        t == b
    }

    pub fn is_horizontal(&self, e: usize) -> bool {
        let (t, b) = self.ends[e];
        self.level(t) == self.level(b)
    }

    /// Edges touching `v`; a loop is listed once.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Half-edges at `v` as `(edge, end)`; a loop contributes both ends.
    pub fn half_edges(&self, v: usize) -> Vec<(usize, End)> {
        let mut out = Vec::new();
        for &e in &self.incident[v] {
            let (t, b) = self.ends[e];
            if t == v {
                out.push((e, End::Top));
            }
            if b == v {
                out.push((e, End::Bottom));
            }
        }
        out
    }

    /// Number of half-edges at `v`.
    pub fn valence(&self, v: usize) -> i64 {
        self.incident[v].iter().map(|&e| if self.is_loop(e) { 2 } else { 1 }).sum()
    }

    pub fn legs_at(&self, v: usize) -> i64 {
        self.leg_at.iter().filter(|&&w| w == v).count() as i64
    }

    pub fn leg_orders_at(&self, v: usize) -> Vec<i32> {
        let mut out: Vec<i32> =
            self.leg_at.iter().zip(&self.legs).filter(|(&w, _)| w == v).map(|(_, l)| l.order).collect();
        out.sort_unstable();
        out
    }

    /// Sorted multiset of leg orders.
    pub fn signature(&self) -> Vec<i32> {
        let mut mu: Vec<i32> = self.legs.iter().map(|l| l.order).collect();
        mu.sort_unstable();
        mu
    }

    /// Order of the differential at a half-edge.
    pub fn half_edge_order(&self, e: usize, end: End, kind: DifferentialKind) -> i64 {
        let k = self.kappa(e);
        let shift = match kind {
            DifferentialKind::Quadratic => 2,
            DifferentialKind::Abelian => 1,
        };
        if self.is_horizontal(e) {
            -shift
        } else {
            match end {
                End::Top => k - shift,
                End::Bottom => -k - shift,
            }
        }
    }

    pub fn is_connected(&self) -> bool {
        self.component_count_of_edges(|_| true) == 1
    }

    /// Connected components of the subgraph keeping the edges selected by `keep`.
    pub(crate) fn component_count_of_edges(&self, keep: impl Fn(usize) -> bool) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        for (e, &(t, b)) in self.ends.iter().enumerate() {
            if keep(e) {
                uf.union(t, b);
            }
        }
        uf.count()
    }

    /// First Betti number `E - V + c`.
    pub fn h1(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + self.component_count_of_edges(|_| true) as i64
    }

    pub fn arithmetic_genus(&self) -> Result<i64> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(self.genus_sum() + self.h1())
    }

    pub fn genus_sum(&self) -> i64 {
        (0..self.vertices.len()).map(|v| self.genus(v)).sum()
    }

    /// Distinct levels, top first.
    pub fn levels(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.vertices.iter().map(|v| v.level).collect();
        set.into_iter().rev().collect()
    }

    /// Relabels levels to `0, -1, -2, ...` keeping their order.
    pub fn normalize_levels(&self) -> Self {
        let levels = self.levels();
        let rank: BTreeMap<i32, i32> = levels.iter().enumerate().map(|(i, &l)| (l, -(i as i32))).collect();
        let mut g = self.clone();
        for v in &mut g.vertices {
            v.level = rank[&v.level];
        }
        g
    }

    /// Checks the quadratic-differential invariants.
    pub fn validate(&self) -> ValidationReport {
        self.validate_as(DifferentialKind::Quadratic)
    }

    pub fn validate_abelian(&self) -> ValidationReport {
        self.validate_as(DifferentialKind::Abelian)
    }

    pub fn validate_as(&self, kind: DifferentialKind) -> ValidationReport {
        let mut violations = Vec::new();
        if !self.is_connected() {
            violations.push(Violation::Disconnected);
        }
        for v in &self.vertices {
            if v.level > 0 {
                violations.push(Violation::PositiveLevel { vertex: v.id.clone() });
            }
        }
        for (e, edge) in self.edges.iter().enumerate() {
            let (t, b) = self.ends[e];
            let (lt, lb) = (self.level(t), self.level(b));
            if lt == lb {
                if edge.kappa != 0 {
                    violations.push(Violation::HorizontalEnhancement { edge: edge.id.clone(), kappa: edge.kappa });
                }
            } else if lt < lb {
                violations.push(Violation::InvertedEdge { edge: edge.id.clone() });
            } else if edge.kappa == 0 {
                violations.push(Violation::VerticalEnhancement { edge: edge.id.clone() });
            }
        }
        self.push_vertex_violations(kind, &mut violations);
        violations.sort();
        ValidationReport { violations }
    }

    /// Pointed stability only, ignoring differentials.
    pub fn stability_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for v in 0..self.vertices.len() {
            if 2 * self.genus(v) - 2 + self.legs_at(v) + self.valence(v) <= 0 {
                out.push(Violation::Unstable { vertex: self.vertices[v].id.clone() });
            }
        }
        out
    }

    fn push_vertex_violations(&self, kind: DifferentialKind, out: &mut Vec<Violation>) {
        let (scale, shift) = match kind {
            DifferentialKind::Quadratic => (4, 4),
            DifferentialKind::Abelian => (2, 2),
        };
        for v in 0..self.vertices.len() {
            let expected = scale * self.genus(v) - shift;
            let actual = self.order_sum(v, kind);
            if expected != actual {
                out.push(Violation::OrderSum { vertex: self.vertices[v].id.clone(), expected, actual });
            }
        }
        out.extend(self.stability_violations());
    }

    /// Sum of leg orders and half-edge orders at `v`.
    pub fn order_sum(&self, v: usize, kind: DifferentialKind) -> i64 {
        let legs: i64 = self.leg_orders_at(v).iter().map(|&m| m as i64).sum();
        let halves: i64 = self.half_edges(v).into_iter().map(|(e, end)| self.half_edge_order(e, end, kind)).sum();
        legs + halves
    }

    /// Boundary size, `deg omega(z)` and arithmetic genus of a subcurve.
    pub fn subcurve_stats(&self, y: &Subcurve) -> Result<SubcurveStats> {
        y.check(self)?;
        let (boundary, interior) = self.cut_counts(y.mask());
        let mut deg = 0;
        let mut genus = 0;
        for v in y.vertices() {
            deg += 2 * self.genus(v) - 2 + self.valence(v) + self.legs_at(v);
            genus += self.genus(v);
        }
        genus += interior - y.len() as i64 + 1;
        Ok(SubcurveStats { boundary, deg_omega_z: deg, genus })
    }

    /// `(boundary edges, interior edges)` of the vertex set `mask`.
    pub(crate) fn cut_counts(&self, mask: u64) -> (i64, i64) {
        let mut boundary = 0;
        let mut interior = 0;
        for &(t, b) in &self.ends {
            match (mask >> t & 1 == 1, mask >> b & 1 == 1) {
                (true, true) => interior += 1,
                (true, false) | (false, true) => boundary += 1,
                _ => {}
            }
        }
        (boundary, interior)
    }

    pub(crate) fn full_mask(&self) -> u64 {
        if self.vertices.len() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.vertices.len()) - 1
        }
    }

    pub(crate) fn require_subset_limit(&self) -> Result<()> {
        if self.vertices.len() > SUBSET_LIMIT {
            Err(Error::TooManyVertices(self.vertices.len()))
        } else {
            Ok(())
        }
    }
}

/// A failed invariant of an otherwise well-formed graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Disconnected,
    PositiveLevel { vertex: String },
    HorizontalEnhancement { edge: String, kappa: u32 },
    VerticalEnhancement { edge: String },
    InvertedEdge { edge: String },
    OrderSum { vertex: String, expected: i64, actual: i64 },
    Unstable { vertex: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Disconnected => write!(f, "graph is disconnected"),
            Violation::PositiveLevel { vertex } => write!(f, "vertex {vertex}: level above 0"),
            Violation::HorizontalEnhancement { edge, kappa } => {
                write!(f, "edge {edge}: horizontal but kappa = {kappa}")
            }
            Violation::VerticalEnhancement { edge } => write!(f, "edge {edge}: vertical but kappa = 0"),
            Violation::InvertedEdge { edge } => write!(f, "edge {edge}: top end lies below bottom end"),
            Violation::OrderSum { vertex, expected, actual } => {
                write!(f, "vertex {vertex}: order sum {actual}, expected {expected}")
            }
            Violation::Unstable { vertex } => write!(f, "vertex {vertex}: not stable"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubcurveStats {
    pub boundary: i64,
    pub deg_omega_z: i64,
    pub genus: i64,
}

/// A non-empty proper set of vertices, stored as a bitmask of vertex indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subcurve(u64);

impl Subcurve {
    pub fn new(graph: &EnhancedLevelGraph, vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = 0u64;
        for v in vertices {
            if v >= graph.num_vertices() || v >= 64 {
                return Err(Error::Invalid(format!("vertex index {v} out of range")));
            }
            mask |= 1 << v;
        }
        let y = Subcurve(mask);
        y.check(graph)?;
        Ok(y)
    }

    pub fn from_ids(graph: &EnhancedLevelGraph, ids: &[&str]) -> Result<Self> {
        let idx = ids
            .iter()
            .map(|id| {
                graph
                    .vertex_index(id)
                    .ok_or_else(|| Error::UnknownVertex { owner: "subcurve".into(), vertex: id.to_string() })
            })
            .collect::<Result<Vec<_>>>()?;
        Subcurve::new(graph, idx)
    }

    pub(crate) fn from_mask(mask: u64) -> Self {
        Subcurve(mask)
    }

    fn check(&self, graph: &EnhancedLevelGraph) -> Result<()> {
        if self.0 == 0 || self.0 & graph.full_mask() == graph.full_mask() || self.0 & !graph.full_mask() != 0 {
            Err(Error::ImproperSubcurve)
        } else {
            Ok(())
        }
    }

    pub fn mask(&self) -> u64 {
        self.0
    }

    pub fn contains(&self, v: usize) -> bool {
        v < 64 && self.0 >> v & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |&v| self.0 >> v & 1 == 1)
    }

    pub fn complement(&self, graph: &EnhancedLevelGraph) -> Subcurve {
        Subcurve(graph.full_mask() & !self.0)
    }

    pub fn ids(&self, graph: &EnhancedLevelGraph) -> Vec<String> {
        self.vertices().map(|v| graph.vertex_id(v).to_string()).collect()
    }

    /// Renders as `{a,b,c}` with vertex ids.
    pub fn display(&self, graph: &EnhancedLevelGraph) -> String {
        format!("{{{}}}", self.ids(graph).join(","))
    }
}

/// All non-empty proper subcurves of `graph`, by increasing mask.
pub fn all_subcurves(graph: &EnhancedLevelGraph) -> Result<impl Iterator<Item = Subcurve>> {
    graph.require_subset_limit()?;
    let full = graph.full_mask();
    Ok((1..full).map(Subcurve))
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    pub(crate) fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}
