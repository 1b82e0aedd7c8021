//! Side-by-side comparison of classical Hitchin fibers over a smooth base and
//! compactified Jacobians of the canonical double covers of collision graphs.

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::corpus;
use crate::cover::{build_cover, enumerate_double_covers, CoverGraph};
use crate::error::{Error, Result};
use crate::polarization::{check_degenerate_on, component_count, enumerate_strata, gcd_nondegeneracy, phi_canonical, threshold, Stability};
use crate::rational::Q;

/// Zero orders of a quadratic differential on a smooth genus-`g` curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroProfile {
    pub genus: i64,
    pub orders: Vec<u32>,
}

impl ZeroProfile {
    pub fn new(genus: i64, orders: Vec<u32>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::Signature(format!("genus {genus} is below 2")));
        }
        if orders.iter().any(|&m| m == 0) {
            return Err(Error::Signature("zero orders must be positive".into()));
        }
        let total: i64 = orders.iter().map(|&m| m as i64).sum();
        if total != 4 * genus - 4 {
            return Err(Error::Signature(format!("orders sum to {total}, expected {}", 4 * genus - 4)));
        }
        Ok(ZeroProfile { genus, orders })
    }

    /// One zero of order `m`, all others simple.
    pub fn collision(genus: i64, m: u32) -> Result<Self> {
        let rest = 4 * genus - 4 - m as i64;
        if m < 1 || rest < 0 {
            return Err(Error::Signature(format!("a zero of order {m} does not fit in genus {genus}")));
        }
        let mut orders = vec![m];
        orders.extend(std::iter::repeat(1).take(rest as usize));
        ZeroProfile::new(genus, orders)
    }
}

/// A stratum `S_D` of the Hitchin fiber: `div(q) - 2D` effective.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HitchinStratum {
    /// Multiplicity of `D` at each zero, in profile order.
    pub divisor: Vec<u32>,
    pub abelian_genus: i64,
    pub r1: Option<i64>,
    pub r2: Option<i64>,
}

pub fn hitchin_strata(profile: &ZeroProfile) -> Result<Vec<HitchinStratum>> {
    let profile = ZeroProfile::new(profile.genus, profile.orders.clone())?;
    let halves: Vec<u32> = profile.orders.iter().map(|m| m / 2).collect();
    let abelian_genus = 4 * profile.genus - 3 - halves.iter().map(|&h| h as i64).sum::<i64>();
    let generic_double = {
        let mut sorted = profile.orders.clone();
        sorted.sort_unstable();
        sorted.last() == Some(&2) && sorted.iter().filter(|&&m| m == 2).count() == 1
    };
    let mut out = Vec::new();
    let mut d = vec![0u32; halves.len()];
    loop {
        let (r1, r2) = match (generic_double, d.iter().any(|&x| x > 0)) {
            (true, false) => (Some(1), Some(0)),
            (true, true) => (Some(0), Some(0)),
            _ => (None, None),
        };
        out.push(HitchinStratum { divisor: d.clone(), abelian_genus, r1, r2 });
        let mut i = 0;
        loop {
            if i == d.len() {
                return Ok(out);
            }
            if d[i] < halves[i] {
                d[i] += 1;
                break;
            }
            d[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitchinCount {
    Exact(u64),
    /// Carried over from the genus-3 square case by the same degree window.
    Extrapolated(u64),
    Unknown,
}

impl HitchinCount {
    pub fn value(self) -> Option<u64> {
        match self {
            HitchinCount::Exact(n) | HitchinCount::Extrapolated(n) => Some(n),
            HitchinCount::Unknown => None,
        }
    }
}

impl Serialize for HitchinCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("HitchinCount", 2)?;
        let (status, value) = match self {
            HitchinCount::Exact(n) => ("exact", Some(*n)),
            HitchinCount::Extrapolated(n) => ("extrapolated", Some(*n)),
            HitchinCount::Unknown => ("unknown", None),
        };
        st.serialize_field("status", status)?;
        st.serialize_field("value", &value)?;
        st.end()
    }
}

/// Irreducible components of the Hitchin fiber over `q`.
pub fn hitchin_component_count(profile: &ZeroProfile, square: bool) -> Result<HitchinCount> {
    let odd = profile.orders.iter().any(|m| m % 2 == 1);
    if square {
        if odd {
            return Err(Error::Invalid("a square differential has only even zero orders".into()));
        }
        if profile.orders.iter().all(|&m| m == 2) {
            let n = (2 * profile.genus - 3) as u64;
            return Ok(if profile.genus == 3 { HitchinCount::Exact(n) } else { HitchinCount::Extrapolated(n) });
        }
        return Ok(HitchinCount::Unknown);
    }
    Ok(if odd { HitchinCount::Exact(1) } else { HitchinCount::Unknown })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Exact rational written as a numerator/denominator pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Fraction {
    pub num: i64,
    pub den: i64,
}

impl From<Q> for Fraction {
    fn from(x: Q) -> Self {
        Fraction { num: *x.numer(), den: *x.denom() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    pub top: Fraction,
    pub bottom: Fraction,
    pub top_closed_form: Fraction,
    pub bottom_closed_form: Fraction,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacobianStratum {
    pub degrees: Vec<i64>,
    pub ns: Vec<String>,
    pub verdict: Stability,
    pub dimension: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacobianSide {
    pub vertices: Vec<String>,
    pub genera: Vec<i64>,
    /// No subcurve has an integral threshold, checked on this graph.
    pub non_degenerate: bool,
    /// The genus/marking/degree gcd criterion, which covers every graph.
    pub gcd_criterion: bool,
    pub components: usize,
    pub components_up_to_symmetry: usize,
    pub merged_semistable: bool,
    pub abelian_rank: i64,
    pub strata: Vec<JacobianStratum>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HitchinSide {
    pub profile: Vec<u32>,
    pub components: HitchinCount,
    pub abelian_rank: i64,
    pub strata: Vec<HitchinStratum>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberComparisonReport {
    pub genus: i64,
    pub zero_order: u32,
    pub case: String,
    pub d_hat: i64,
    pub jacobian: JacobianSide,
    pub hitchin: HitchinSide,
    pub thresholds: Option<Thresholds>,
    pub components_equal: Option<bool>,
    pub abelian_rank_difference: i64,
    pub strata_nonisomorphic: bool,
    pub notes: Vec<String>,
}

fn jacobian_side(cover: &CoverGraph, d_hat: i64) -> Result<JacobianSide> {
    let s = cover.source();
    let phi = phi_canonical(s, d_hat)?;
    let count = component_count(s, &phi)?;
    let strata = enumerate_strata(s, &phi)?
        .into_iter()
        .map(|st| JacobianStratum {
            ns: st.class.ns_ids(s),
            degrees: st.class.degrees,
            verdict: st.verdict,
            dimension: st.dimension,
        })
        .collect();
    Ok(JacobianSide {
        vertices: (0..s.num_vertices()).map(|v| s.vertex_id(v).to_string()).collect(),
        genera: (0..s.num_vertices()).map(|v| s.genus(v)).collect(),
        non_degenerate: check_degenerate_on(s, &phi)?.is_none(),
        gcd_criterion: gcd_nondegeneracy(s.arithmetic_genus()?, s.num_legs() as i64, d_hat),
        components: count.labeled,
        components_up_to_symmetry: count.up_to_symmetry,
        merged_semistable: count.merged,
        abelian_rank: s.genus_sum(),
        strata,
        warnings: count.warnings,
    })
}

fn assemble(
    genus: i64,
    zero_order: u32,
    case: &str,
    d_hat: i64,
    cover: &CoverGraph,
    profile: ZeroProfile,
    square: bool,
) -> Result<FiberComparisonReport> {
    let jacobian = jacobian_side(cover, d_hat)?;
    let strata = hitchin_strata(&profile)?;
    let hitchin = HitchinSide {
        components: hitchin_component_count(&profile, square)?,
        abelian_rank: strata[0].abelian_genus,
        profile: profile.orders,
        strata,
    };
    let diff = jacobian.abelian_rank - hitchin.abelian_rank;
    let mut notes = Vec::new();
    if let HitchinCount::Extrapolated(_) = hitchin.components {
        notes.push("the Hitchin count extends the genus-3 square-case window to 2g-3".into());
    }
    if hitchin.components == HitchinCount::Unknown {
        notes.push("the Hitchin component count is not determined for this profile".into());
    }
    Ok(FiberComparisonReport {
        genus,
        zero_order,
        case: case.into(),
        d_hat,
        components_equal: hitchin.components.value().map(|h| h == jacobian.components as u64),
        abelian_rank_difference: diff,
        strata_nonisomorphic: diff != 0,
        jacobian,
        hitchin,
        thresholds: None,
        notes,
    })
}

/// Cover of a single collision of `2k` (even) or `2k+1` (odd) simple zeros,
/// with the top vertex unsplit.
pub fn collision_cover(g: u32, k: u32, parity: Parity) -> Result<CoverGraph> {
    let m = match parity {
        Parity::Even => 2 * k,
        Parity::Odd => 2 * k + 1,
    };
    if k < 1 || g < 2 || m > 4 * g - 4 {
        return Err(Error::Signature(format!("a zero of order {m} does not fit in genus {g}")));
    }
    let target = match parity {
        Parity::Even => corpus::banana_target(g, k),
        Parity::Odd => corpus::compact_target(g, k),
    };
    enumerate_double_covers(&target)?
        .into_iter()
        .find(|c| !c.is_split(0))
        .ok_or_else(|| Error::Cover("no cover with connected top fiber".into()))
}

/// Closed forms of the two basic-inequality thresholds on the source.
pub fn closed_form_thresholds(g: i64, k: i64, parity: Parity, d_hat: i64) -> (Q, Q) {
    let d = Q::from_integer(d_hat);
    let k = Q::from_integer(k);
    match parity {
        Parity::Even => {
            let den = Q::from_integer(6 * g - 6);
            let top = d + (k - 2) / 3 + d * (Q::from_integer(1) - k * 2) / den;
            let bottom = d * (k * 2 - 1) / den - (k + 4) / 3;
            (top, bottom)
        }
        Parity::Odd => {
            let den = Q::from_integer(3 * g - 3);
            let top = d - d * k / den + k / 3;
            let bottom = d * k / den - k / 3 - 1;
            (top, bottom)
        }
    }
}

/// Compares the two fibers over a curve with one zero of order `2k` or
/// `2k+1` and all other zeros simple.
pub fn compare_fibers(g: u32, k: u32, parity: Parity, d_hat: i64) -> Result<FiberComparisonReport> {
    let cover = collision_cover(g, k, parity)?;
    let m = match parity {
        Parity::Even => 2 * k,
        Parity::Odd => 2 * k + 1,
    };
    let profile = ZeroProfile::collision(g as i64, m)?;
    let case = match parity {
        Parity::Even => "banana",
        Parity::Odd => "compact-type",
    };
    let mut report = assemble(g as i64, m, case, d_hat, &cover, profile, false)?;
    let s = cover.source();
    let phi = phi_canonical(s, d_hat)?;
    let top = cover.vertex_fiber(0)[0];
    let bottom = cover.vertex_fiber(1)[0];
    let (t, b) = (threshold(s, &phi, 1 << top), threshold(s, &phi, 1 << bottom));
    let (ct, cb) = closed_form_thresholds(g as i64, k as i64, parity, d_hat);
    report.thresholds = Some(Thresholds {
        top: t.into(),
        bottom: b.into(),
        top_closed_form: ct.into(),
        bottom_closed_form: cb.into(),
        matches: t == ct && b == cb,
    });
    if parity == Parity::Even {
        let period = 6 * g as i64 - 6;
        let coprime = |x: i64| x.gcd(&period) == 1;
        report.notes.push(format!(
            "coprimality is read as gcd(d^, 6g-6) = 1 ({}); the variant gcd(d^-2g-2, 6g-6) = 1 gives {}",
            coprime(d_hat),
            coprime(d_hat - 2 * g as i64 - 2)
        ));
    }
    Ok(report)
}

/// The split cover over the graph where all zeros collide in pairs.
pub fn square_cover(g: u32) -> Result<CoverGraph> {
    if g < 2 {
        return Err(Error::Signature(format!("genus {g} is below 2")));
    }
    let target = corpus::fig2_target(g);
    let mut fibers = vec![1u8; target.num_vertices()];
    fibers[0] = 2;
    build_cover(&target, &fibers, &vec![false; target.num_edges()])
}

/// Compares the fibers over a global square `q = a^2` with simple zeros of `a`.
pub fn compare_square(g: u32, d_hat: i64) -> Result<FiberComparisonReport> {
    let cover = square_cover(g)?;
    let profile = ZeroProfile::new(g as i64, vec![2; 2 * g as usize - 2])?;
    assemble(g as i64, 2, "square", d_hat, &cover, profile, true)
}
