//! Degree-level spectral correspondence: twist bundles, induced polarizations,
//! pushforward of multidegrees with the node taxonomy, and the Prym and
//! fixed-determinant conditions as integer systems.

use serde::Serialize;

use crate::cover::CoverGraph;
use crate::error::{Error, Result};
use crate::graph::{End, EnhancedLevelGraph};
use crate::polarization::{MultidegreeClass, NumericalPolarization, Stability};
use crate::rational::{self, Q};

/// `deg M_v` where `M_v^2` carries the restricted quadratic differential.
pub fn twist_bundle_degrees(graph: &EnhancedLevelGraph) -> Vec<i64> {
    (0..graph.num_vertices())
        .map(|v| {
            let mut deg = 2 * graph.genus(v) - 2 + graph.valence(v);
            for (e, end) in graph.half_edges(v) {
                let k = graph.kappa(e);
                match end {
                    End::Top => deg -= k.div_euclid(2),
                    End::Bottom => deg += (k + 1).div_euclid(2),
                }
            }
            deg
        })
        .collect()
}

/// Local type of the pushed-forward sheaf at a target node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodeType {
    #[serde(rename = "LF/fix")]
    LfFix,
    #[serde(rename = "NS/fix")]
    NsFix,
    #[serde(rename = "LF/swap")]
    LfSwap,
    #[serde(rename = "NS/swap-one")]
    NsSwapOne,
    #[serde(rename = "NS/swap-both")]
    NsSwapBoth,
}

impl NodeType {
    pub const ALL: [NodeType; 5] =
        [NodeType::LfFix, NodeType::NsFix, NodeType::LfSwap, NodeType::NsSwapOne, NodeType::NsSwapBoth];

    /// Number of non-free summands `m` in the local form `O^a + m^b`; also the
    /// twist of the determinant at the node.
    pub fn ns_rank(self) -> i64 {
        match self {
            NodeType::LfSwap => 0,
            NodeType::LfFix | NodeType::NsSwapOne => 1,
            NodeType::NsFix | NodeType::NsSwapBoth => 2,
        }
    }

    pub fn is_fix(self) -> bool {
        matches!(self, NodeType::LfFix | NodeType::NsFix)
    }

    pub fn label(self) -> &'static str {
        match self {
            NodeType::LfFix => "LF/fix",
            NodeType::NsFix => "NS/fix",
            NodeType::LfSwap => "LF/swap",
            NodeType::NsSwapOne => "NS/swap-one",
            NodeType::NsSwapBoth => "NS/swap-both",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        NodeType::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(text))
            .ok_or_else(|| Error::Taxonomy(format!("unknown node type `{text}`")))
    }
}

/// Degrees of the rank-two sheaf on the normalized target components, with
/// its node types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankTwoDegrees {
    pub degrees: Vec<i64>,
    pub taxonomy: Vec<NodeType>,
}

impl RankTwoDegrees {
    /// `deg E = sum_v deg E_v + sum_e (number of m summands at e)`.
    pub fn total(&self) -> i64 {
        self.degrees.iter().sum::<i64>() + self.taxonomy.iter().map(|t| t.ns_rank()).sum::<i64>()
    }
}

fn check_source_class(cover: &CoverGraph, d_hat: &MultidegreeClass) -> Result<()> {
    MultidegreeClass::new(cover.source(), d_hat.degrees.clone(), d_hat.ns.clone()).map(|_| ())
}

/// Pushes a source multidegree down: on each target component the degree is
/// preserved Euler characteristic of the fiber curve minus `2(1 - g_v)`.
pub fn pushforward_multidegree(cover: &CoverGraph, d_hat: &MultidegreeClass) -> Result<RankTwoDegrees> {
    check_source_class(cover, d_hat)?;
    let (s, t) = (cover.source(), cover.target());
    let degrees = (0..t.num_vertices())
        .map(|v| {
            let fiber = cover.vertex_fiber(v);
            let deg: i64 = fiber.iter().map(|&w| d_hat.degrees[w]).sum();
            let chi: i64 = fiber.iter().map(|&w| 1 - s.genus(w)).sum();
            deg + chi - 2 * (1 - t.genus(v))
        })
        .collect();
    let taxonomy = (0..t.num_edges())
        .map(|e| {
            let ns = cover.edge_fiber(e).iter().filter(|f| d_hat.ns.contains(f)).count();
            match (t.kappa(e) % 2 == 1, ns) {
                (true, 0) => NodeType::LfFix,
                (true, _) => NodeType::NsFix,
                (false, 0) => NodeType::LfSwap,
                (false, 1) => NodeType::NsSwapOne,
                (false, _) => NodeType::NsSwapBoth,
            }
        })
        .collect();
    Ok(RankTwoDegrees { degrees, taxonomy })
}

/// Outcome of an integer feasibility problem, with the twist `m_e` per target
/// edge when feasible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<Vec<i64>>,
}

fn require_tree(graph: &EnhancedLevelGraph) -> Result<()> {
    if graph.is_connected() && graph.num_edges() + 1 == graph.num_vertices() {
        Ok(())
    } else {
        Err(Error::Invalid("the target graph must be a tree".into()))
    }
}

/// Line bundle degrees on the target: all of `deg L` on the unique top vertex.
pub fn line_bundle_on_top(graph: &EnhancedLevelGraph, deg_l: i64) -> Result<Vec<i64>> {
    let top = graph.levels()[0];
    let tops: Vec<usize> = (0..graph.num_vertices()).filter(|&v| graph.level(v) == top).collect();
    if tops.len() != 1 {
        return Err(Error::Invalid("the top level must consist of one vertex".into()));
    }
    let mut ell = vec![0; graph.num_vertices()];
    ell[tops[0]] = deg_l;
    Ok(ell)
}

/// Solves `sum_e coef(row, e) m_e = rhs(row)` over the integers, where rows
/// sit over the vertices of the target tree and every coefficient of a row on
/// an edge at its vertex is non-zero. The solution, if any, is unique; it is
/// found by peeling leaves and then checked against every row.
fn solve_on_tree(
    target: &EnhancedLevelGraph,
    rows: &[(usize, Vec<i64>, i64)],
) -> Feasibility {
    let n = target.num_vertices();
    let e_count = target.num_edges();
    let mut m: Vec<Option<i64>> = vec![None; e_count];
    let mut remaining: Vec<usize> = (0..n).map(|v| target.incident_edges(v).len()).collect();
    let mut done = vec![false; n];
    let rep = |v: usize| rows.iter().find(|r| r.0 == v);
    let mut stack: Vec<usize> = (0..n).filter(|&v| remaining[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if done[v] || remaining[v] != 1 {
            continue;
        }
        let Some(e) = target.incident_edges(v).iter().copied().find(|&e| m[e].is_none()) else { continue };
        let Some((_, coef, rhs)) = rep(v) else { continue };
        let known: i64 = (0..e_count).filter_map(|f| m[f].map(|x| x * coef[f])).sum();
        let c = coef[e];
        let r = rhs - known;
        if c == 0 || r % c != 0 {
            return Feasibility { feasible: false, witness: None };
        }
        m[e] = Some(r / c);
        done[v] = true;
        let (a, b) = target.ends(e);
        let other = if a == v { b } else { a };
        remaining[v] -= 1;
        remaining[other] -= 1;
        if remaining[other] == 1 {
            stack.push(other);
        }
    }
    let m: Vec<i64> = m.into_iter().map(|x| x.unwrap_or(0)).collect();
    let ok = rows.iter().all(|(_, coef, rhs)| coef.iter().zip(&m).map(|(c, x)| c * x).sum::<i64>() == *rhs);
    if ok {
        Feasibility { feasible: true, witness: Some(m) }
    } else {
        Feasibility { feasible: false, witness: None }
    }
}

/// One row per source component for the Prym condition:
/// `d(v) + d(sigma v) - b(v) + corrections = deg(pi|v) l(pi v) + twist`.
/// `end_of` picks the branch used for the NS correction of each source NS edge.
pub fn prym_rows(
    cover: &CoverGraph,
    d_hat: &MultidegreeClass,
    ell: &[i64],
    end_of: &dyn Fn(usize) -> End,
) -> Result<Vec<(usize, Vec<i64>, i64)>> {
    check_source_class(cover, d_hat)?;
    let (s, t) = (cover.source(), cover.target());
    if ell.len() != t.num_vertices() {
        return Err(Error::MultidegreeLength { expected: t.num_vertices(), actual: ell.len() });
    }
    let sv = cover.sigma_vertex();
    let se = cover.sigma_edge();
    let mut corr = vec![0i64; s.num_vertices()];
    for &f in &d_hat.ns {
        let end = end_of(f);
        let at = |g: usize| {
            let (a, b) = s.ends(g);
            if end == End::Top {
                a
            } else {
                b
            }
        };
        corr[at(f)] += 1;
        corr[at(se[f])] += 1;
    }
    let mut rows = Vec::new();
    for w in 0..s.num_vertices() {
        let v = cover.vertex_map()[w];
        let ramified = (0..s.num_legs())
            .filter(|&x| s.leg_vertex(x) == w && t.legs()[cover.leg_map()[x]].order.rem_euclid(2) == 1)
            .count() as i64;
        let lhs = d_hat.degrees[w] + d_hat.degrees[sv[w]] - ramified + corr[w];
        let sheet_degree = if cover.vertex_fiber(v).len() == 1 { 2 } else { 1 };
        let mut coef = vec![0i64; t.num_edges()];
        for f in 0..s.num_edges() {
            let (a, b) = s.ends(f);
            let e = cover.edge_map()[f];
            if a == w {
                coef[e] += 1;
            }
            if b == w {
                coef[e] -= 1;
            }
        }
        rows.push((v, coef, lhs - sheet_degree * ell[v]));
    }
    Ok(rows)
}

/// Number of ramification legs: preimages of odd-order target legs.
pub fn ramification_count(cover: &CoverGraph) -> usize {
    let t = cover.target();
    cover.leg_map().iter().filter(|&&l| t.legs()[l].order.rem_euclid(2) == 1).count()
}

fn require_principal(cover: &CoverGraph) -> Result<()> {
    let g = cover.target().arithmetic_genus()?;
    let b = ramification_count(cover) as i64;
    if b != 4 * g - 4 {
        return Err(Error::Invalid(format!("{b} ramification points, expected {}", 4 * g - 4)));
    }
    Ok(())
}

/// Prym condition at multidegree level with `deg L` on the top vertex.
pub fn prym_degree_feasible(cover: &CoverGraph, d_hat: &MultidegreeClass, deg_l: i64) -> Result<Feasibility> {
    let ell = line_bundle_on_top(cover.target(), deg_l)?;
    prym_degree_feasible_with(cover, d_hat, &ell, &|_| End::Top)
}

/// Prym condition for an arbitrary target multidegree of `L` and NS branch
/// choice.
pub fn prym_degree_feasible_with(
    cover: &CoverGraph,
    d_hat: &MultidegreeClass,
    ell: &[i64],
    end_of: &dyn Fn(usize) -> End,
) -> Result<Feasibility> {
    require_tree(cover.target())?;
    require_principal(cover)?;
    let rows = prym_rows(cover, d_hat, ell, end_of)?;
    Ok(solve_on_tree(cover.target(), &rows))
}

/// Checks that fix-types sit exactly on odd enhancements.
pub fn check_taxonomy(graph: &EnhancedLevelGraph, taxonomy: &[NodeType]) -> Result<()> {
    if taxonomy.len() != graph.num_edges() {
        return Err(Error::Taxonomy(format!("{} tags for {} edges", taxonomy.len(), graph.num_edges())));
    }
    for (e, tag) in taxonomy.iter().enumerate() {
        if tag.is_fix() != (graph.kappa(e) % 2 == 1) {
            return Err(Error::Taxonomy(format!(
                "edge {} has kappa {} but tag {}",
                graph.edge_id(e),
                graph.kappa(e),
                tag.label()
            )));
        }
    }
    Ok(())
}

/// One row per target component for the determinant condition:
/// `deg E_v + node twists = l_v + twist`.
pub fn det_rows(
    graph: &EnhancedLevelGraph,
    data: &RankTwoDegrees,
    ell: &[i64],
    end_of: &dyn Fn(usize) -> End,
) -> Result<Vec<(usize, Vec<i64>, i64)>> {
    check_taxonomy(graph, &data.taxonomy)?;
    if data.degrees.len() != graph.num_vertices() || ell.len() != graph.num_vertices() {
        return Err(Error::MultidegreeLength { expected: graph.num_vertices(), actual: data.degrees.len() });
    }
    let mut lhs = data.degrees.clone();
    for (e, tag) in data.taxonomy.iter().enumerate() {
        let (a, b) = graph.ends(e);
        let at = if end_of(e) == End::Top { a } else { b };
        lhs[at] += tag.ns_rank();
    }
    Ok((0..graph.num_vertices())
        .map(|v| {
            let mut coef = vec![0i64; graph.num_edges()];
            for e in 0..graph.num_edges() {
                let (a, b) = graph.ends(e);
                if a == v {
                    coef[e] += 1;
                }
                if b == v {
                    coef[e] -= 1;
                }
            }
            (v, coef, lhs[v] - ell[v])
        })
        .collect())
}

/// Fixed-determinant condition at multidegree level with `deg L` on the top
/// vertex.
pub fn det_degree_feasible(cover: &CoverGraph, data: &RankTwoDegrees, deg_l: i64) -> Result<Feasibility> {
    let ell = line_bundle_on_top(cover.target(), deg_l)?;
    det_degree_feasible_with(cover.target(), data, &ell, &|_| End::Top)
}

pub fn det_degree_feasible_with(
    graph: &EnhancedLevelGraph,
    data: &RankTwoDegrees,
    ell: &[i64],
    end_of: &dyn Fn(usize) -> End,
) -> Result<Feasibility> {
    require_tree(graph)?;
    let rows = det_rows(graph, data, ell, end_of)?;
    Ok(solve_on_tree(graph, &rows))
}

/// Slopes of `pi^* P + O^{rk P}` on the source and their fiber means.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InducedPolarization {
    #[serde(with = "rational::vec_as_string")]
    pub source_slopes: Vec<Q>,
    #[serde(with = "rational::vec_as_string")]
    pub fiber_means: Vec<Q>,
    pub rank: i64,
    pub d_hat: i64,
}

impl InducedPolarization {
    /// The numerical polarization on the source:
    /// `phi_v = s_v + (2 g_v - 2 + val_v) / 2`.
    pub fn phi(&self, cover: &CoverGraph) -> Result<NumericalPolarization> {
        let s = cover.source();
        let weights = (0..s.num_vertices())
            .map(|v| self.source_slopes[v] + Q::new(2 * s.genus(v) - 2 + s.valence(v), 2))
            .collect();
        NumericalPolarization::new(s, weights)
    }
}

/// Induced polarization from target slopes `s_v = deg P|_v / rk P`, which must
/// sum to `d - 2g + 2`.
pub fn induced_polarization(cover: &CoverGraph, slopes: &[Q], rank: i64, d: i64) -> Result<InducedPolarization> {
    if rank <= 0 {
        return Err(Error::Polarization(format!("rank {rank} is not positive")));
    }
    let t = cover.target();
    if slopes.len() != t.num_vertices() {
        return Err(Error::MultidegreeLength { expected: t.num_vertices(), actual: slopes.len() });
    }
    let g = t.arithmetic_genus()?;
    let total: Q = slopes.iter().sum();
    if total != Q::from_integer(d - 2 * g + 2) {
        return Err(Error::Polarization(format!("slopes sum to {total}, expected d - 2g + 2 = {}", d - 2 * g + 2)));
    }
    let g_hat = cover.source().arithmetic_genus()?;
    let source_slopes: Vec<Q> = cover
        .vertex_map()
        .iter()
        .map(|&v| if cover.vertex_fiber(v).len() == 1 { slopes[v] } else { slopes[v] / 2 })
        .collect();
    let fiber_means = (0..t.num_vertices())
        .map(|v| {
            let fiber = cover.vertex_fiber(v);
            fiber.iter().map(|&w| source_slopes[w]).sum::<Q>() / fiber.len() as i64
        })
        .collect();
    Ok(InducedPolarization { source_slopes, fiber_means, rank, d_hat: d + g_hat - 2 * g + 1 })
}

/// A source subcurve described from the target: vertices with their whole
/// fiber (`full`), and split vertices with a single chosen sheet (`half`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetDatum {
    pub full: Vec<usize>,
    pub half: Vec<(usize, usize)>,
}

/// Decides semistability of `d_hat` through target data: for each datum the
/// Euler characteristic of `F` on the corresponding source subcurve must be at
/// least `sum_{full} s_v + sum_{half} s_v / 2`.
pub fn target_side_stability(
    cover: &CoverGraph,
    induced: &InducedPolarization,
    slopes: &[Q],
    d_hat: &MultidegreeClass,
) -> Result<Stability> {
    check_source_class(cover, d_hat)?;
    let (s, t) = (cover.source(), cover.target());
    let n = t.num_vertices();
    if n > 12 {
        return Err(Error::TooManyVertices(n));
    }
    debug_assert_eq!(induced.source_slopes.len(), s.num_vertices());
    let mut verdict = Stability::Stable;
    // Each target vertex: 0 = absent, 1 = full fiber, 2/3 = one sheet.
    let choices: Vec<Vec<u8>> = (0..n).map(|v| if cover.is_split(v) { vec![0, 1, 2, 3] } else { vec![0, 1] }).collect();
    let mut state = vec![0u8; n];
    loop {
        let mut datum = TargetDatum { full: Vec::new(), half: Vec::new() };
        let mut mask = 0u64;
        for v in 0..n {
            let fiber = cover.vertex_fiber(v);
            match state[v] {
                1 => {
                    datum.full.push(v);
                    for &w in &fiber {
                        mask |= 1 << w;
                    }
                }
                2 | 3 => {
                    let w = fiber[(state[v] - 2) as usize];
                    datum.half.push((v, w));
                    mask |= 1 << w;
                }
                _ => {}
            }
        }
        if mask != 0 && mask != s.full_mask() {
            let chi = euler_characteristic_on(s, d_hat, mask);
            let bound: Q = datum.full.iter().map(|&v| slopes[v]).sum::<Q>()
                + datum.half.iter().map(|&(v, _)| slopes[v] / 2).sum::<Q>();
            let chi = Q::from_integer(chi);
            if chi < bound {
                return Ok(Stability::Unstable);
            }
            if chi == bound {
                verdict = Stability::StrictlySemistable;
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(verdict);
            }
            let pos = choices[i].iter().position(|&c| c == state[i]).unwrap();
            if pos + 1 < choices[i].len() {
                state[i] = choices[i][pos + 1];
                break;
            }
            state[i] = choices[i][0];
            i += 1;
        }
    }
}

/// `chi(F_W) = deg F_W + sum_{W} (1 - g_v) - #edges inside W`.
pub fn euler_characteristic_on(graph: &EnhancedLevelGraph, class: &MultidegreeClass, mask: u64) -> i64 {
    let (_, interior) = graph.cut_counts(mask);
    let genus: i64 = (0..graph.num_vertices()).filter(|v| mask >> v & 1 == 1).map(|v| 1 - graph.genus(v)).sum();
    class.degree_on(graph, mask) + genus - interior
}
