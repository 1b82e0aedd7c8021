//! Numerical polarizations and stability of multidegrees.
//!
//! A multidegree `D` with Neveu-Schwarz set `N` is semistable for `phi` when
//! every non-empty proper subcurve `Y` satisfies
//! `deg F_Y >= phi_Y - |Y cap Y^c| / 2`, with `deg F_Y` the sum of `d_v` over
//! `Y` plus the NS nodes with both branches in `Y`.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{all_subcurves, EnhancedLevelGraph, Subcurve, UnionFind};
use crate::rational::{self, Q};
use crate::symmetry;

/// Rational weight per vertex (indexed like the graph's vertices) with an
/// integral total.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NumericalPolarization {
    #[serde(with = "rational::vec_as_string")]
    weights: Vec<Q>,
    degree: i64,
}

impl NumericalPolarization {
    pub fn new(graph: &EnhancedLevelGraph, weights: Vec<Q>) -> Result<Self> {
        if weights.len() != graph.num_vertices() {
            return Err(Error::Polarization(format!(
                "{} weights for {} vertices",
                weights.len(),
                graph.num_vertices()
            )));
        }
        let total: Q = weights.iter().sum();
        if !total.is_integer() {
            return Err(Error::Polarization(format!("total weight {total} is not an integer")));
        }
        Ok(NumericalPolarization { weights, degree: total.to_integer() })
    }

    /// Reads `{"vertex id": "p/q", ...}`.
    pub fn from_json(graph: &EnhancedLevelGraph, text: &str) -> Result<Self> {
        let map: BTreeMap<String, String> = serde_json::from_str(text)?;
        let mut weights = vec![None; graph.num_vertices()];
        for (id, value) in &map {
            let v = graph
                .vertex_index(id)
                .ok_or_else(|| Error::UnknownVertex { owner: "polarization".into(), vertex: id.clone() })?;
            weights[v] = Some(rational::parse_q(value)?);
        }
        let weights = weights
            .into_iter()
            .enumerate()
            .map(|(v, w)| w.ok_or_else(|| Error::Polarization(format!("no weight for {}", graph.vertex_id(v)))))
            .collect::<Result<Vec<_>>>()?;
        NumericalPolarization::new(graph, weights)
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> Q {
        self.weights[v]
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// `phi_Y`.
    pub fn on(&self, y: u64) -> Q {
        self.weights.iter().enumerate().filter(|(v, _)| y >> v & 1 == 1).map(|(_, w)| *w).sum()
    }
}

/// The pointed canonical polarization of degree `d`.
pub fn phi_canonical(graph: &EnhancedLevelGraph, d: i64) -> Result<NumericalPolarization> {
    let g = graph.arithmetic_genus()?;
    let n = graph.num_legs() as i64;
    let denom = 2 * g - 2 + n;
    if denom == 0 {
        return Err(Error::Polarization("2g - 2 + n vanishes".into()));
    }
    let weights = (0..graph.num_vertices())
        .map(|v| {
            let omega = 2 * graph.genus(v) - 2 + graph.valence(v);
            Q::new((d - g + 1) * (omega + graph.legs_at(v)), denom) + Q::new(omega, 2)
        })
        .collect();
    NumericalPolarization::new(graph, weights)
}

/// `gcd(d - g + 1, 2g - 2 + n) == 1`.
pub fn gcd_nondegeneracy(g: i64, n: i64, d: i64) -> bool {
    (d - g + 1).gcd(&(2 * g - 2 + n)) == 1
}

/// `phi_Y - |Y cap Y^c| / 2` for the subcurve with mask `y`.
pub fn threshold(graph: &EnhancedLevelGraph, phi: &NumericalPolarization, y: u64) -> Q {
    let (boundary, _) = graph.cut_counts(y);
    phi.on(y) - Q::new(boundary, 2)
}

/// A subcurve whose threshold is an integer, if any.
pub fn check_degenerate_on(graph: &EnhancedLevelGraph, phi: &NumericalPolarization) -> Result<Option<Subcurve>> {
    Ok(all_subcurves(graph)?.find(|y| threshold(graph, phi, y.mask()).is_integer()))
}

/// Integer degree per vertex plus a set of NS edges (indices).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultidegreeClass {
    pub degrees: Vec<i64>,
    pub ns: BTreeSet<usize>,
}

impl MultidegreeClass {
    pub fn new(graph: &EnhancedLevelGraph, degrees: Vec<i64>, ns: BTreeSet<usize>) -> Result<Self> {
        if degrees.len() != graph.num_vertices() {
            return Err(Error::MultidegreeLength { expected: graph.num_vertices(), actual: degrees.len() });
        }
        if let Some(&e) = ns.iter().find(|&&e| e >= graph.num_edges()) {
            return Err(Error::UnknownEdge(format!("#{e}")));
        }
        Ok(MultidegreeClass { degrees, ns })
    }

    pub fn locally_free(degrees: Vec<i64>) -> Self {
        MultidegreeClass { degrees, ns: BTreeSet::new() }
    }

    /// Builds from NS edge ids.
    pub fn with_ns_ids(graph: &EnhancedLevelGraph, degrees: Vec<i64>, ns: &[&str]) -> Result<Self> {
        let ns = ns
            .iter()
            .map(|id| graph.edge_index(id).ok_or_else(|| Error::UnknownEdge(id.to_string())))
            .collect::<Result<BTreeSet<_>>>()?;
        MultidegreeClass::new(graph, degrees, ns)
    }

    /// Sheaf degree: `sum d_v + |N|`.
    pub fn total(&self) -> i64 {
        self.degrees.iter().sum::<i64>() + self.ns.len() as i64
    }

    /// `deg F_Y` for the vertex set `y`.
    pub fn degree_on(&self, graph: &EnhancedLevelGraph, y: u64) -> i64 {
        let base: i64 = self.degrees.iter().enumerate().filter(|(v, _)| y >> v & 1 == 1).map(|(_, d)| d).sum();
        let inner = self
            .ns
            .iter()
            .filter(|&&e| {
                let (a, b) = graph.ends(e);
                y >> a & 1 == 1 && y >> b & 1 == 1
            })
            .count() as i64;
        base + inner
    }

    pub fn ns_ids(&self, graph: &EnhancedLevelGraph) -> Vec<String> {
        self.ns.iter().map(|&e| graph.edge_id(e).to_string()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    StrictlySemistable,
    Unstable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::StrictlySemistable => "strictly-semistable",
            Stability::Unstable => "unstable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub verdict: Stability,
    /// Subcurves where the inequality is an equality.
    pub equality: Vec<Subcurve>,
    /// Subcurves where it fails.
    pub violations: Vec<Subcurve>,
}

/// Thresholds of all subcurves, scaled to integers by a common factor.
struct ScaledThresholds {
    scale: i64,
    /// `(mask, scale * threshold)` for every non-empty proper subcurve.
    masks: Vec<(u64, i64)>,
}

impl ScaledThresholds {
    fn new(graph: &EnhancedLevelGraph, phi: &NumericalPolarization) -> Result<Self> {
        graph.require_subset_limit()?;
        let scale = phi.weights().iter().fold(2i64, |acc, w| acc.lcm(w.denom()));
        let masks = (1..graph.full_mask())
            .map(|y| {
                let t = threshold(graph, phi, y) * Q::from_integer(scale);
                debug_assert!(t.is_integer());
                (y, t.to_integer())
            })
            .collect();
        Ok(ScaledThresholds { scale, masks })
    }

    fn verdict(&self, degree_on: impl Fn(u64) -> i64) -> (Stability, Vec<u64>, Vec<u64>) {
        let mut equality = Vec::new();
        let mut violations = Vec::new();
        for &(y, t) in &self.masks {
            let lhs = degree_on(y) * self.scale;
            if lhs < t {
                violations.push(y);
            } else if lhs == t {
                equality.push(y);
            }
        }
        let verdict = if !violations.is_empty() {
            Stability::Unstable
        } else if !equality.is_empty() {
            Stability::StrictlySemistable
        } else {
            Stability::Stable
        };
        (verdict, equality, violations)
    }
}

fn check_total(phi: &NumericalPolarization, total: i64) -> Result<()> {
    if phi.degree() != total {
        Err(Error::DegreeMismatch { expected: phi.degree(), actual: total })
    } else {
        Ok(())
    }
}

/// Evaluates the basic inequality on every non-empty proper subcurve.
pub fn is_semistable(
    graph: &EnhancedLevelGraph,
    phi: &NumericalPolarization,
    class: &MultidegreeClass,
) -> Result<StabilityReport> {
    let class = MultidegreeClass::new(graph, class.degrees.clone(), class.ns.clone())?;
    check_total(phi, class.total())?;
    let th = ScaledThresholds::new(graph, phi)?;
    let (verdict, eq, bad) = th.verdict(|y| class.degree_on(graph, y));
    Ok(StabilityReport {
        verdict,
        equality: eq.into_iter().map(Subcurve::from_mask).collect(),
        violations: bad.into_iter().map(Subcurve::from_mask).collect(),
    })
}

/// Semistable multidegrees with a fixed NS set, split into stable and
/// strictly semistable, each sorted.
pub fn enumerate_semistable_with_ns(
    graph: &EnhancedLevelGraph,
    phi: &NumericalPolarization,
    ns: &BTreeSet<usize>,
) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let th = ScaledThresholds::new(graph, phi)?;
    let n = graph.num_vertices();
    let full = graph.full_mask();
    let total = phi.degree();
    let free_total = total - ns.len() as i64;
    let ns_loops = |v: usize| ns.iter().filter(|&&e| graph.ends(e) == (v, v)).count() as i64;
    let ns_touch = |v: usize| {
        ns.iter()
            .filter(|&&e| {
                let (a, b) = graph.ends(e);
                a == v || b == v
            })
            .count() as i64
    };
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for v in 0..n {
        if n == 1 {
            lo.push(free_total);
            hi.push(free_total);
            continue;
        }
        let single = 1u64 << v;
        lo.push(rational::ceil(&threshold(graph, phi, single)) - ns_loops(v));
        hi.push(total - ns_touch(v) - rational::ceil(&threshold(graph, phi, full & !single)));
    }
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok((Vec::new(), Vec::new()));
    }
    let class_of = |d: Vec<i64>| MultidegreeClass { degrees: d, ns: ns.clone() };
    let first: Vec<i64> = (lo[0]..=hi[0]).collect();
    let results: Vec<(Stability, Vec<i64>)> = first
        .par_iter()
        .flat_map_iter(|&d0| {
            let mut found = Vec::new();
            let mut current = vec![d0];
            boxes(&lo, &hi, free_total - d0, &mut current, &mut |d| {
                let c = class_of(d.to_vec());
                let (verdict, _, _) = th.verdict(|y| c.degree_on(graph, y));
                if verdict != Stability::Unstable {
                    found.push((verdict, d.to_vec()));
                }
            });
            found
        })
        .collect();
    let mut stable: Vec<Vec<i64>> = Vec::new();
    let mut semi: Vec<Vec<i64>> = Vec::new();
    for (verdict, d) in results {
        match verdict {
            Stability::Stable => stable.push(d),
            _ => semi.push(d),
        }
    }
    stable.sort();
    semi.sort();
    Ok((stable, semi))
}

/// Visits integer vectors inside `[lo, hi]` extending `current` whose
/// remaining entries sum to `remaining`.
fn boxes(lo: &[i64], hi: &[i64], remaining: i64, current: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    let i = current.len();
    if i == lo.len() {
        if remaining == 0 {
            f(current);
        }
        return;
    }
    let rest_lo: i64 = lo[i + 1..].iter().sum();
    let rest_hi: i64 = hi[i + 1..].iter().sum();
    let from = lo[i].max(remaining - rest_hi);
    let to = hi[i].min(remaining - rest_lo);
    for x in from..=to {
        current.push(x);
        boxes(lo, hi, remaining - x, current, f);
        current.pop();
    }
}

/// Semistable locally free multidegrees: `(stable, strictly semistable)`.
pub fn enumerate_semistable(
    graph: &EnhancedLevelGraph,
    phi: &NumericalPolarization,
) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    enumerate_semistable_with_ns(graph, phi, &BTreeSet::new())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub class: MultidegreeClass,
    pub verdict: Stability,
    pub dimension: i64,
}

/// Largest edge count for stratum enumeration over NS subsets.
pub const NS_EDGE_LIMIT: usize = 16;

/// Every semistable `(D, N)`; dimension is the genus sum plus the first Betti
/// number of the graph with `N` removed. Sorted by `|N|`, then `N`, then `D`.
pub fn enumerate_strata(graph: &EnhancedLevelGraph, phi: &NumericalPolarization) -> Result<Vec<Stratum>> {
    let e = graph.num_edges();
    if e > NS_EDGE_LIMIT {
        return Err(Error::SearchTooLarge(format!("{e} edges; NS subsets are enumerated up to {NS_EDGE_LIMIT}")));
    }
    let mut subsets: Vec<BTreeSet<usize>> =
        (0u64..1 << e).map(|bits| (0..e).filter(|&i| bits >> i & 1 == 1).collect()).collect();
    subsets.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let mut out = Vec::new();
    for ns in subsets {
        let (stable, semi) = enumerate_semistable_with_ns(graph, phi, &ns)?;
        let dimension = stratum_dimension(graph, &ns);
        let mut items: Vec<Stratum> = stable
            .into_iter()
            .map(|d| (d, Stability::Stable))
            .chain(semi.into_iter().map(|d| (d, Stability::StrictlySemistable)))
            .map(|(d, verdict)| Stratum { class: MultidegreeClass { degrees: d, ns: ns.clone() }, verdict, dimension })
            .collect();
        items.sort_by(|a, b| a.class.degrees.cmp(&b.class.degrees));
        out.extend(items);
    }
    Ok(out)
}

/// `sum g_v + h1(graph minus N)`.
pub fn stratum_dimension(graph: &EnhancedLevelGraph, ns: &BTreeSet<usize>) -> i64 {
    let kept = graph.num_edges() - ns.len();
    let comps = graph.component_count_of_edges(|e| !ns.contains(&e));
    graph.genus_sum() + kept as i64 - graph.num_vertices() as i64 + comps as i64
}

/// Edges whose removal disconnects the graph.
pub fn bridges(graph: &EnhancedLevelGraph) -> Vec<usize> {
    let base = graph.component_count_of_edges(|_| true);
    (0..graph.num_edges())
        .filter(|&e| !graph.is_loop(e) && graph.component_count_of_edges(|f| f != e) > base)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentCount {
    /// Count with vertices labeled.
    pub labeled: usize,
    /// Count up to vertex symmetries of the graph.
    pub up_to_symmetry: usize,
    /// True when the count comes from merging strictly semistable classes.
    pub merged: bool,
    pub warnings: Vec<String>,
}

/// Irreducible components of the compactified Jacobian fiber.
///
/// Stable locally free multidegrees each give one. Without any, strictly
/// semistable multidegrees `D' + e_a` and `D' + e_b` are identified whenever
/// `(D', {e})` is semistable for a separating edge `e = ab`.
pub fn component_count(graph: &EnhancedLevelGraph, phi: &NumericalPolarization) -> Result<ComponentCount> {
    let group = symmetry::vertex_automorphisms(graph);
    let (stable, semi) = enumerate_semistable(graph, phi)?;
    if !stable.is_empty() {
        return Ok(ComponentCount {
            labeled: stable.len(),
            up_to_symmetry: symmetry::count_orbits(&stable, &group),
            merged: false,
            warnings: Vec::new(),
        });
    }
    let index: BTreeMap<&Vec<i64>, usize> = semi.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut uf = UnionFind::new(semi.len());
    let bridge_set = bridges(graph);
    for &e in &bridge_set {
        let ns: BTreeSet<usize> = [e].into_iter().collect();
        let (s1, s2) = enumerate_semistable_with_ns(graph, phi, &ns)?;
        let (a, b) = graph.ends(e);
        for d in s1.iter().chain(&s2) {
            let mut da = d.clone();
            da[a] += 1;
            let mut db = d.clone();
            db[b] += 1;
            if let (Some(&i), Some(&j)) = (index.get(&da), index.get(&db)) {
                uf.union(i, j);
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<Vec<i64>>> = BTreeMap::new();
    for (i, d) in semi.iter().enumerate() {
        classes.entry(uf.find(i)).or_default().push(d.clone());
    }
    let mut warnings = Vec::new();
    if !semi.is_empty() && e_count_other_strata(graph, phi, &bridge_set)? {
        warnings.push("semistable strata exist beyond single separating nodes; those identifications are not merged".into());
    }
    let keys: BTreeSet<Vec<Vec<i64>>> = classes
        .values()
        .map(|class| {
            group
                .iter()
                .map(|p| {
                    let mut c: Vec<Vec<i64>> = class.iter().map(|d| symmetry::permute(d, p)).collect();
                    c.sort();
                    c
                })
                .min()
                .unwrap_or_else(|| class.clone())
        })
        .collect();
    Ok(ComponentCount { labeled: classes.len(), up_to_symmetry: keys.len(), merged: true, warnings })
}

/// Whether some semistable stratum has an NS set other than one bridge.
fn e_count_other_strata(graph: &EnhancedLevelGraph, phi: &NumericalPolarization, bridges: &[usize]) -> Result<bool> {
    if graph.num_edges() > NS_EDGE_LIMIT {
        return Ok(true);
    }
    for stratum in enumerate_strata(graph, phi)? {
        let ns = &stratum.class.ns;
        if ns.is_empty() {
            continue;
        }
        if ns.len() == 1 && bridges.contains(ns.iter().next().unwrap()) {
            continue;
        }
        return Ok(true);
    }
    Ok(false)
}

/// Number of spanning trees (matrix-tree theorem, exact Bareiss elimination).
pub fn spanning_tree_count(graph: &EnhancedLevelGraph) -> i128 {
    let n = graph.num_vertices();
    if n <= 1 {
        return 1;
    }
    let mut lap = vec![vec![0i128; n]; n];
    for e in 0..graph.num_edges() {
        let (a, b) = graph.ends(e);
        if a != b {
            lap[a][a] += 1;
            lap[b][b] += 1;
            lap[a][b] -= 1;
            lap[b][a] -= 1;
        }
    }
    let mut m: Vec<Vec<i128>> = lap[1..].iter().map(|row| row[1..].to_vec()).collect();
    bareiss_det(&mut m)
}

fn bareiss_det(m: &mut [Vec<i128>]) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}
