//! Spherical caps and segments on `√m S²`, exact lattice point counts in them,
//! the maximal number of lattice points on a plane, Riesz energies and the
//! three-regime pair decompositions used to bound the exponential sum.

use std::collections::{BTreeMap, HashMap};

use num::integer::gcd;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact;
use crate::lattice::{Frequency, FrequencySet};
use crate::plane::{Frame, PlaneType};
use crate::reduce::{pairwise_sum, par_count, par_sum};
use crate::vec3::{self, Vec3};

/// Default ceiling on `N` for the triple enumeration behind [`kappa_exact`].
pub const DEFAULT_KAPPA_CEILING: usize = 2000;

/// Projections below this magnitude count as zero in the rational-plane split.
/// For integer differences and a rational frame every nonzero projection is
/// at least the reciprocal of an integer bounded by a power of `m`.
pub const ZERO_PROJECTION_TOL: f64 = 1e-9;

fn unit_direction(alpha: &Vec3) -> Result<Vec3> {
    vec3::normalize(alpha).ok_or_else(|| Error::invalid("direction must be nonzero"))
}

fn check_sphere(set: &FrequencySet, m: u64) -> Result<()> {
    if set.m() != m {
        return Err(Error::invalid(format!(
            "region lives on the sphere m = {m} but the frequency set has m = {}",
            set.m()
        )));
    }
    Ok(())
}

/// Closed cap `{x ∈ √m S² : ‖x − √m α‖ ≤ s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    direction: Vec3,
    radius_s: f64,
    m: u64,
}

impl Cap {
    pub fn new(direction: Vec3, radius_s: f64, m: u64) -> Result<Self> {
        let direction = unit_direction(&direction)?;
        let r = (m as f64).sqrt();
        if !(0.0..=2.0 * r).contains(&radius_s) {
            return Err(Error::invalid(format!("cap radius {radius_s} outside [0, 2√m]")));
        }
        Ok(Self { direction, radius_s, m })
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn radius_s(&self) -> f64 {
        self.radius_s
    }

    pub fn sphere_radius(&self) -> f64 {
        (self.m as f64).sqrt()
    }

    /// `h = s²/(2R)`.
    pub fn height(&self) -> f64 {
        self.radius_s * self.radius_s / (2.0 * self.sphere_radius())
    }

    /// Polar angle `φ` of the base circle seen from the centre.
    fn polar_angle(&self) -> f64 {
        2.0 * (self.radius_s / (2.0 * self.sphere_radius())).min(1.0).asin()
    }

    pub fn base_radius(&self) -> f64 {
        self.sphere_radius() * self.polar_angle().sin()
    }

    pub fn opening_angle(&self) -> f64 {
        let two_phi = 2.0 * self.polar_angle();
        two_phi.min(2.0 * std::f64::consts::PI - two_phi)
    }

    /// `s` at the rounded value of `2√m` is read as the whole sphere, since
    /// `(2√m)²` need not round back to `4m`.
    pub fn covers_sphere(&self) -> bool {
        self.radius_s >= 2.0 * self.sphere_radius()
    }

    /// The same region as an offset segment `⟨x, α⟩ ∈ [R − h, R]`.
    pub fn as_segment(&self) -> Segment {
        let r = self.sphere_radius();
        Segment { direction: self.direction, lo: r - self.height(), hi: r, m: self.m }
    }
}

/// Closed segment `{x ∈ √m S² : c₁ ≤ ⟨x, α⟩ ≤ c₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    direction: Vec3,
    lo: f64,
    hi: f64,
    m: u64,
}

impl Segment {
    pub fn new(direction: Vec3, lo: f64, hi: f64, m: u64) -> Result<Self> {
        let direction = unit_direction(&direction)?;
        if !(lo <= hi) {
            return Err(Error::invalid(format!("segment offsets [{lo}, {hi}] are not ordered")));
        }
        Ok(Self { direction, lo, hi, m })
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn offsets(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn sphere_radius(&self) -> f64 {
        (self.m as f64).sqrt()
    }

    pub fn height(&self) -> f64 {
        self.hi - self.lo
    }

    fn clipped(&self) -> (f64, f64) {
        let r = self.sphere_radius();
        (self.lo.clamp(-r, r), self.hi.clamp(-r, r))
    }

    /// Whether both bounding planes lie on the same side of the centre.
    /// Segments straddling the centre are allowed but flagged by this.
    pub fn in_hemisphere(&self) -> bool {
        self.lo >= 0.0 || self.hi <= 0.0
    }

    /// Radius of the larger base circle.
    pub fn base_radius(&self) -> f64 {
        let r = self.sphere_radius();
        let (lo, hi) = self.clipped();
        if lo <= 0.0 && hi >= 0.0 {
            return r;
        }
        let c = lo.abs().min(hi.abs());
        (r * r - c * c).max(0.0).sqrt()
    }

    /// `θ = 2·∠AOC` with `A`, `C` on the two bounding planes in a common
    /// meridian.
    pub fn opening_angle(&self) -> f64 {
        let r = self.sphere_radius();
        let (lo, hi) = self.clipped();
        2.0 * ((hi / r).asin() - (lo / r).asin()).abs()
    }

    pub fn contains(&self, p: &Frequency) -> bool {
        exact::dot_in_interval(&p.0, &self.direction, self.lo, self.hi)
    }
}

pub fn count_in_cap(set: &FrequencySet, cap: &Cap) -> Result<usize> {
    check_sphere(set, cap.m)?;
    if cap.covers_sphere() {
        return Ok(set.len());
    }
    Ok(set
        .points()
        .iter()
        .filter(|p| exact::in_cap(&p.0, &cap.direction, cap.m, cap.radius_s))
        .count())
}

pub fn count_in_segment(set: &FrequencySet, seg: &Segment) -> Result<usize> {
    check_sphere(set, seg.m)?;
    Ok(set.points().iter().filter(|p| seg.contains(p)).count())
}

/// The segment `{λ : |⟨P − λ, α⟩| ≤ c}` of height `2c` around `P`.
pub fn segment_from_halfwidth(p: &Frequency, alpha: &Vec3, c: f64) -> Result<Segment> {
    if !(c > 0.0) {
        return Err(Error::invalid("half-width must be positive"));
    }
    let alpha = unit_direction(alpha)?;
    let center = vec3::dot(&p.as_f64(), &alpha);
    Segment::new(alpha, center - c, center + c, p.norm_sq() as u64)
}

/// Ordered pairs `(λ, λ′)`, `λ ≠ λ′`, with `|⟨λ − λ′, α⟩| ≤ ρ‖λ − λ′‖`.
pub fn cone_pair_filter(set: &FrequencySet, alpha: &Vec3, rho: f64) -> Result<Vec<(Frequency, Frequency)>> {
    if !(rho > 0.0) {
        return Err(Error::invalid("cone parameter must be positive"));
    }
    let alpha = unit_direction(alpha)?;
    let pts = set.points();
    let rows: Vec<Vec<(Frequency, Frequency)>> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            pts.iter()
                .enumerate()
                .filter(|&(j, q)| j != i && exact::in_cone(&pts[i].sub(q), &alpha, rho))
                .map(|(_, q)| (pts[i], *q))
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Canonical key of the plane through three integer points: primitive normal
/// with its first nonzero entry positive, plus the integer offset.
pub type PlaneKey = ([i64; 3], i64);

fn plane_key(a: &[i64; 3], b: &[i64; 3], c: &[i64; 3]) -> PlaneKey {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let mut n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let g = gcd(gcd(n[0], n[1]), n[2]);
    // three distinct points of a sphere are never collinear
    debug_assert!(g != 0);
    let sign = if n.iter().find(|x| **x != 0).copied().unwrap_or(1) < 0 { -1 } else { 1 };
    for x in n.iter_mut() {
        *x = *x / g * sign;
    }
    (n, n[0] * a[0] + n[1] * a[1] + n[2] * a[2])
}

/// Smallest `t` with `C(t, k) ≥ tally`, or `None` if `tally` is not a
/// binomial coefficient `C(t, k)`.
fn invert_binomial(tally: u64, k: u32) -> Option<u64> {
    let binom = |t: u64| -> u64 {
        (0..k as u64).fold(1u64, |acc, i| acc * (t - i) / (i + 1))
    };
    let mut t = k as u64;
    while binom(t) < tally {
        t += 1;
    }
    (binom(t) == tally).then_some(t)
}

fn check_kappa_ceiling(set: &FrequencySet, ceiling: usize) -> Result<()> {
    if set.len() > ceiling {
        return Err(Error::Resource(format!(
            "N = {} exceeds the triple-enumeration ceiling {ceiling}",
            set.len()
        )));
    }
    Ok(())
}

/// Number of coplanar triples per plane, over all unordered triples of the
/// set. A plane holding `t ≥ 3` points has tally exactly `C(t, 3)`.
pub fn plane_tallies(set: &FrequencySet, ceiling: usize) -> Result<HashMap<PlaneKey, u64>> {
    check_kappa_ceiling(set, ceiling)?;
    let pts = set.points();
    let n = pts.len();
    let merged = (0..n)
        .into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<PlaneKey, u64>, i| {
            for j in i + 1..n {
                for k in j + 1..n {
                    *acc.entry(plane_key(&pts[i].0, &pts[j].0, &pts[k].0)).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (key, v) in b {
                *a.entry(key).or_insert(0) += v;
            }
            a
        });
    Ok(merged)
}

/// `κ`: the maximal number of points of the set on one plane.
pub fn kappa_exact(set: &FrequencySet) -> Result<usize> {
    kappa_exact_with_ceiling(set, DEFAULT_KAPPA_CEILING)
}

/// Triple enumeration keyed by plane, processed one smallest index at a time:
/// for the triples whose smallest index is `i`, a plane through `i` carrying
/// `r` later points receives `C(r, 2)` of them, so `t = r + 1` whenever `i` is
/// the smallest index on that plane. Maximising over `i` recovers the exact
/// maximum with `O(N²)` memory; the global `C(t, 3)` tallies are available
/// from [`plane_tallies`].
pub fn kappa_exact_with_ceiling(set: &FrequencySet, ceiling: usize) -> Result<usize> {
    check_kappa_ceiling(set, ceiling)?;
    let pts = set.points();
    let n = pts.len();
    if n == 0 {
        return Err(Error::invalid("κ is undefined for an empty frequency set"));
    }
    let best = (0..n)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut local: HashMap<PlaneKey, u64> = HashMap::new();
            for j in i + 1..n {
                for k in j + 1..n {
                    *local.entry(plane_key(&pts[i].0, &pts[j].0, &pts[k].0)).or_insert(0) += 1;
                }
            }
            local.values().try_fold(0u64, |best, &tally| {
                let r = invert_binomial(tally, 2).ok_or_else(|| {
                    Error::Numerical(format!("plane tally {tally} is not a triangular number"))
                })?;
                Ok(best.max(r + 1))
            })
        })
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))?;
    Ok(if best >= 3 { best as usize } else { n.min(2) })
}

/// Recover each plane's point count from its tally `C(t, 3)`.
pub fn tally_point_counts(tallies: &HashMap<PlaneKey, u64>) -> Result<Vec<u64>> {
    tallies
        .values()
        .map(|&tally| {
            invert_binomial(tally, 3)
                .ok_or_else(|| Error::Numerical(format!("plane tally {tally} is not C(t, 3)")))
        })
        .collect()
}

/// Largest count over caps of chord radius `s` centred at points of the set.
/// A lower bound for the supremum over all caps.
pub fn max_cap_count(set: &FrequencySet, s: f64) -> Result<usize> {
    let r = set.radius();
    if !(0.0..=2.0 * r + 1e-12).contains(&s) {
        return Err(Error::invalid(format!("cap radius {s} outside [0, 2√m]")));
    }
    let pts = set.points();
    if s >= 2.0 * r {
        return Ok(pts.len());
    }
    Ok((0..pts.len())
        .into_par_iter()
        .map(|i| {
            pts.iter()
                .filter(|q| {
                    let d = pts[i].sub(q);
                    exact::int_le_sq(d[0] * d[0] + d[1] * d[1] + d[2] * d[2], s)
                })
                .count()
        })
        .max()
        .unwrap_or(0))
}

/// `2^{1−s}/(2−s)`, the limiting value of the normalised Riesz energy.
pub fn riesz_limit_constant(s: f64) -> f64 {
    2f64.powf(1.0 - s) / (2.0 - s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszEnergy {
    pub m: u64,
    pub n: usize,
    pub s: f64,
    /// `Σ_{λ≠λ′} m^{s/2}/‖λ − λ′‖^s` over ordered pairs.
    pub energy: f64,
    /// `energy / N²`.
    pub ratio: f64,
    pub limit_constant: f64,
}

/// Multiplicities of the squared distances `‖λ − λ′‖²` over ordered pairs.
pub fn distance_histogram(set: &FrequencySet) -> BTreeMap<i64, u64> {
    let pts = set.points();
    (0..pts.len())
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, i| {
            for (j, q) in pts.iter().enumerate() {
                if j != i {
                    let d = pts[i].sub(q);
                    *acc.entry(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).or_insert(0u64) += 1;
                }
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

/// Riesz `s`-energy of the projected set. Ordered pairs are folded by their
/// squared distance, so the sum runs over distinct distances in increasing order.
pub fn riesz_energy(set: &FrequencySet, s: f64) -> Result<RieszEnergy> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::invalid(format!("Riesz exponent {s} outside (0, 2)")));
    }
    if set.len() < 2 {
        return Err(Error::UndefinedEnergy(set.len()));
    }
    let m = set.m() as f64;
    let terms: Vec<f64> = distance_histogram(set)
        .into_iter()
        .map(|(d2, count)| count as f64 * (m / d2 as f64).powf(s / 2.0))
        .collect();
    let energy = pairwise_sum(&terms);
    let n = set.len();
    Ok(RieszEnergy {
        m: set.m(),
        n,
        s,
        energy,
        ratio: energy / (n as f64 * n as f64),
        limit_constant: riesz_limit_constant(s),
    })
}

/// Parameters of the three-regime split of ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeParams {
    /// `|⟨d, ξ⟩| ≤ c` and `|⟨d, η⟩| ≤ ρ‖d‖`.
    Angular { c: f64, rho: f64 },
    /// `|⟨d, ξ⟩| ≤ c` and `|⟨d, η⟩| ≤ c′`.
    Offset { c: f64, c_prime: f64 },
}

impl RegimeParams {
    /// Default split for a plane type and set size: `(N^{3/7}, N^{−8/7})` for
    /// type (ii), `(N^{1/14}, N^{−6/7})` for type (iii), `c = c′ = N^{1/5}` in
    /// conditional mode and the zero-projection split for rational planes.
    pub fn default_for(plane_type: PlaneType, n: usize, conditional: bool) -> Self {
        let n = n as f64;
        if conditional {
            let c = n.powf(0.2);
            return RegimeParams::Offset { c, c_prime: c };
        }
        match plane_type {
            PlaneType::I => RegimeParams::Offset { c: ZERO_PROJECTION_TOL, c_prime: ZERO_PROJECTION_TOL },
            PlaneType::II => RegimeParams::Angular { c: n.powf(3.0 / 7.0), rho: n.powf(-8.0 / 7.0) },
            PlaneType::III => RegimeParams::Angular { c: n.powf(1.0 / 14.0), rho: n.powf(-6.0 / 7.0) },
        }
    }

    /// `(c, ρ or c′)`.
    pub fn values(&self) -> (f64, f64) {
        match *self {
            RegimeParams::Angular { c, rho } => (c, rho),
            RegimeParams::Offset { c, c_prime } => (c, c_prime),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCounts {
    pub params: RegimeParams,
    pub n_first: u64,
    pub n_second: u64,
    /// `Σ 1/(⟨d,ξ⟩²⟨d,η⟩²)` over pairs in neither of the first two regimes.
    pub third_sum: f64,
    pub n_third: u64,
}

pub fn regime_counts(set: &FrequencySet, frame: &Frame, params: RegimeParams) -> Result<RegimeCounts> {
    let (c, second) = params.values();
    if !(c > 0.0 && second > 0.0) {
        return Err(Error::invalid("regime parameters must be positive"));
    }
    let pts = set.points();
    let n = pts.len();
    let first = |d: &[i64; 3]| exact::dot_in_interval(d, &frame.xi, -c, c);
    let second_ok = |d: &[i64; 3]| match params {
        RegimeParams::Angular { rho, .. } => exact::in_cone(d, &frame.eta, rho),
        RegimeParams::Offset { c_prime, .. } => exact::dot_in_interval(d, &frame.eta, -c_prime, c_prime),
    };
    let row = |i: usize| -> (u64, u64, u64, f64) {
        let mut f = 0;
        let mut s = 0;
        let mut t = 0;
        let mut acc = 0.0;
        for (j, q) in pts.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = pts[i].sub(q);
            let in_first = first(&d);
            let in_second = second_ok(&d);
            f += in_first as u64;
            s += in_second as u64;
            if !in_first && !in_second {
                let df = [d[0] as f64, d[1] as f64, d[2] as f64];
                let x = vec3::dot(&df, &frame.xi);
                let y = vec3::dot(&df, &frame.eta);
                acc += 1.0 / (x * x * y * y);
                t += 1;
            }
        }
        (f, s, t, acc)
    };
    let rows: Vec<(u64, u64, u64, f64)> = (0..n).into_par_iter().map(row).collect();
    let sums: Vec<f64> = rows.iter().map(|r| r.3).collect();
    Ok(RegimeCounts {
        params,
        n_first: rows.iter().map(|r| r.0).sum(),
        n_second: rows.iter().map(|r| r.1).sum(),
        n_third: rows.iter().map(|r| r.2).sum(),
        third_sum: pairwise_sum(&sums),
    })
}

/// One row of the segment-count report: the exact count and each applicable
/// bound with the `R^ε` factors and implied constants dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiRow {
    pub lo: f64,
    pub hi: f64,
    pub height: f64,
    pub base_radius: f64,
    pub opening_angle: f64,
    pub count: usize,
    pub bounds: Vec<(&'static str, f64)>,
}

impl PsiRow {
    pub fn ratios(&self) -> Vec<(&'static str, f64)> {
        self.bounds.iter().map(|(name, b)| (*name, self.count as f64 / b)).collect()
    }
}

/// Explicit parts of the segment bounds applicable to a direction type:
/// `1 + h` (rational), `R^{1/2}(R^{1/4} + h)` (irrational),
/// `κ(1 + Rθ^{1/2})` (type ii), `κ(1 + Rθ^{1/3})` (type iii), and the
/// conditional `R^{1/2} + h` for every type.
pub fn psi_bounds(direction_type: PlaneType, r: f64, h: f64, theta: f64, kappa: usize) -> Vec<(&'static str, f64)> {
    let kappa = kappa as f64;
    let mut out = Vec::new();
    match direction_type {
        PlaneType::I => out.push(("psi1", 1.0 + h)),
        PlaneType::II => {
            out.push(("psi2", r.sqrt() * (r.powf(0.25) + h)));
            out.push(("psi3", kappa * (1.0 + r * theta.sqrt())));
        }
        PlaneType::III => {
            out.push(("psi2", r.sqrt() * (r.powf(0.25) + h)));
            out.push(("psi4", kappa * (1.0 + r * theta.cbrt())));
        }
    }
    out.push(("psi5", r.sqrt() + h));
    out
}

pub fn psi_bound_report(
    set: &FrequencySet,
    direction_type: PlaneType,
    segments: &[Segment],
    kappa: usize,
) -> Result<Vec<PsiRow>> {
    segments
        .iter()
        .map(|seg| {
            let count = count_in_segment(set, seg)?;
            let (lo, hi) = seg.offsets();
            Ok(PsiRow {
                lo,
                hi,
                height: seg.height(),
                base_radius: seg.base_radius(),
                opening_angle: seg.opening_angle(),
                count,
                bounds: psi_bounds(direction_type, seg.sphere_radius(), seg.height(), seg.opening_angle(), kappa),
            })
        })
        .collect()
}

/// Segments of half-width `c` in direction `α` around up to `count` points of
/// the set, taken at evenly spaced indices.
pub fn segments_around_points(set: &FrequencySet, alpha: &Vec3, c: f64, count: usize) -> Result<Vec<Segment>> {
    let pts = set.points();
    if pts.is_empty() || count == 0 {
        return Ok(Vec::new());
    }
    let step = (pts.len() / count.min(pts.len())).max(1);
    pts.iter().step_by(step).take(count).map(|p| segment_from_halfwidth(p, alpha, c)).collect()
}

/// Explicit parts of the cap bounds: `1 + s²/R^{1/2}` (unconditional) and
/// `1 + s²/R` (conjectural).
pub fn chi_bounds(r: f64, s: f64) -> (f64, f64) {
    (1.0 + s * s / r.sqrt(), 1.0 + s * s / r)
}

/// Count pairs using [`par_count`] for quick integer statistics over rows.
pub fn count_pairs<F>(set: &FrequencySet, pred: F) -> u64
where
    F: Fn(&Frequency, &Frequency) -> bool + Sync + Send,
{
    let pts = set.points();
    par_count(pts.len(), |i| {
        pts.iter().enumerate().filter(|&(j, q)| j != i && pred(&pts[i], q)).count() as u64
    })
}

/// Sum of `f` over ordered pairs, reduced in a fixed order.
pub fn sum_pairs<F>(set: &FrequencySet, f: F) -> f64
where
    F: Fn(&Frequency, &Frequency) -> f64 + Sync + Send,
{
    let pts = set.points();
    par_sum(pts.len(), |i| {
        let row: Vec<f64> = pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| f(&pts[i], q)).collect();
        pairwise_sum(&row)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_frequencies;

    fn set(m: u64) -> FrequencySet {
        enumerate_frequencies(m).unwrap()
    }

    #[test]
    fn cap_examples() {
        let s1 = set(1);
        for alpha in [[1.0, 0.0, 0.0], [0.3, -0.2, 0.9]] {
            assert_eq!(count_in_cap(&s1, &Cap::new(alpha, 2.0, 1).unwrap()).unwrap(), 6);
        }
        assert_eq!(count_in_cap(&s1, &Cap::new([1.0, 0.0, 0.0], 0.0, 1).unwrap()).unwrap(), 1);
        assert_eq!(count_in_cap(&s1, &Cap::new([1.0, 0.0, 0.0], 1.5, 1).unwrap()).unwrap(), 5);
        let wrong = Cap::new([1.0, 0.0, 0.0], 1.0, 2).unwrap();
        assert!(matches!(count_in_cap(&s1, &wrong), Err(Error::InvalidInput(_))));
        assert!(Cap::new([1.0, 0.0, 0.0], 2.5, 1).is_err());
    }

    #[test]
    fn cap_geometry() {
        let cap = Cap::new([0.0, 0.0, 1.0], 3.0, 25).unwrap();
        let r = 5.0;
        assert!((cap.radius_s().powi(2) - 2.0 * r * cap.height()).abs() < 1e-12);
        // base circle sits at height R − h with radius √(R² − (R − h)²)
        let k = (r * r - (r - cap.height()).powi(2)).sqrt();
        assert!((cap.base_radius() - k).abs() < 1e-12);
        let full = Cap::new([0.0, 0.0, 1.0], 10.0, 25).unwrap();
        assert!(full.base_radius().abs() < 1e-12 && full.opening_angle().abs() < 1e-12);
        let half = Cap::new([0.0, 0.0, 1.0], 50f64.sqrt(), 25).unwrap();
        assert!((half.opening_angle() - std::f64::consts::PI).abs() < 1e-12);
        assert!((half.base_radius() - r).abs() < 1e-12);
    }

    #[test]
    fn segment_examples() {
        let s1 = set(1);
        let z = [0.0, 0.0, 1.0];
        assert_eq!(count_in_segment(&s1, &Segment::new(z, -0.1, 0.1, 1).unwrap()).unwrap(), 4);
        assert_eq!(count_in_segment(&s1, &Segment::new(z, -1.0, 1.0, 1).unwrap()).unwrap(), 6);
        assert_eq!(count_in_segment(&set(2), &Segment::new(z, 1.0, 1.0, 2).unwrap()).unwrap(), 4);
        assert!(Segment::new(z, 1.0, 0.0, 1).is_err());
        let seg = Segment::new(z, 0.2, 0.6, 1).unwrap();
        assert!(seg.in_hemisphere());
        assert!(!Segment::new(z, -0.2, 0.6, 1).unwrap().in_hemisphere());
        let expected = 2.0 * (0.6f64.asin() - 0.2f64.asin());
        assert!((seg.opening_angle() - expected).abs() < 1e-15);
        assert!((seg.base_radius() - (1.0f64 - 0.04).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn halfwidth_segments() {
        let s1 = set(1);
        let p = Frequency([1, 0, 0]);
        let seg = segment_from_halfwidth(&p, &[1.0, 0.0, 0.0], 0.5).unwrap();
        assert_eq!(seg.offsets(), (0.5, 1.5));
        assert_eq!(seg.height(), 1.0);
        let inside: Vec<_> = s1.points().iter().filter(|q| seg.contains(q)).collect();
        assert_eq!(inside, vec![&p]);
        let s = set(29);
        for p in s.points().iter().step_by(7) {
            let seg = segment_from_halfwidth(p, &[0.3, 0.1, -0.5], 2.0 * s.radius()).unwrap();
            assert_eq!(count_in_segment(&s, &seg).unwrap(), s.len());
        }
        assert!(segment_from_halfwidth(&p, &[1.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn cone_filter() {
        let s1 = set(1);
        assert_eq!(cone_pair_filter(&s1, &[0.2, 0.3, 0.5], 1.0).unwrap().len(), 30);
        let pairs = cone_pair_filter(&s1, &[0.0, 0.0, 1.0], 0.1).unwrap();
        // brute force: |Δz| ≤ 0.1‖Δ‖ forces Δz = 0 on the unit sphere
        let brute = s1
            .points()
            .iter()
            .flat_map(|a| s1.points().iter().map(move |b| (a, b)))
            .filter(|(a, b)| a != b && a.0[2] == b.0[2])
            .count();
        assert_eq!(brute, 12);
        assert_eq!(pairs.len(), brute);
        assert!(pairs.contains(&(Frequency([1, 0, 0]), Frequency([0, 1, 0]))));
        for (a, b) in &pairs {
            assert!(pairs.contains(&(*b, *a)));
        }
    }

    #[test]
    fn kappa_small() {
        assert_eq!(kappa_exact(&set(1)).unwrap(), 4);
        // the plane x + y + z = 0 meets the m = 2 sphere in a regular hexagon
        assert_eq!(kappa_exact(&set(2)).unwrap(), 6);
        assert_eq!(kappa_exact(&set(3)).unwrap(), 4);
        assert!(matches!(kappa_exact_with_ceiling(&set(29), 10), Err(Error::Resource(_))));
        assert!(kappa_exact(&set(7)).is_err());
    }

    #[test]
    fn tallies_are_binomial() {
        for m in [1, 2, 3, 5, 6, 9, 11, 14, 17, 29] {
            let s = set(m);
            let tallies = plane_tallies(&s, DEFAULT_KAPPA_CEILING).unwrap();
            let counts = tally_point_counts(&tallies).unwrap();
            let from_tallies = counts.into_iter().max().unwrap() as usize;
            assert_eq!(from_tallies, kappa_exact(&s).unwrap(), "m = {m}");
        }
    }

    #[test]
    fn binomial_inversion() {
        assert_eq!(invert_binomial(1, 3), Some(3));
        assert_eq!(invert_binomial(4, 3), Some(4));
        assert_eq!(invert_binomial(5, 3), None);
        assert_eq!(invert_binomial(10, 2), Some(5));
    }

    #[test]
    fn max_caps() {
        let s1 = set(1);
        assert_eq!(max_cap_count(&s1, 2.0).unwrap(), 6);
        assert_eq!(max_cap_count(&s1, 1.5).unwrap(), 5);
        let s = set(29);
        let mut prev = 0;
        for k in 0..=40 {
            let c = max_cap_count(&s, k as f64 * 2.0 * s.radius() / 40.0).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, s.len());
        assert_eq!(max_cap_count(&s, 2.0 * s.radius()).unwrap(), s.len());
        assert_eq!(count_in_cap(&s, &Cap::new([0.1, 0.2, 0.3], 2.0 * s.radius(), 29).unwrap()).unwrap(), s.len());
    }

    #[test]
    fn riesz_examples() {
        let e = riesz_energy(&set(1), 1.0).unwrap();
        assert!((e.energy - (24.0 / 2f64.sqrt() + 3.0)).abs() < 1e-12);
        assert!((riesz_limit_constant(1.0) - 1.0).abs() < 1e-15);
        assert!((riesz_limit_constant(0.5) - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert!(matches!(riesz_energy(&set(7), 1.0), Err(Error::UndefinedEnergy(0))));
        assert!(riesz_energy(&set(1), 2.0).is_err());
        // folded sum against the plain double loop
        let s = set(41);
        let m = s.m() as f64;
        let direct = sum_pairs(&s, |a, b| {
            let d = a.sub(b);
            (m / (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).powf(0.75)
        });
        let folded = riesz_energy(&s, 1.5).unwrap().energy;
        assert!((direct - folded).abs() < 1e-10 * direct);
    }

    #[test]
    fn regimes_exhaust_pairs() {
        let s = set(29);
        let n = s.len() as u64;
        let frame = Frame::from_normal([1.0, 2.0, 2f64.sqrt()]).unwrap();
        let big = 2.0 * s.radius() + 1.0;
        let rc = regime_counts(&s, &frame, RegimeParams::Angular { c: big, rho: 1.0 }).unwrap();
        assert_eq!((rc.n_first, rc.n_second, rc.n_third), (n * (n - 1), n * (n - 1), 0));
        assert_eq!(rc.third_sum, 0.0);
        let rc = regime_counts(&s, &frame, RegimeParams::default_for(PlaneType::II, s.len(), false)).unwrap();
        assert!(rc.n_first <= n * (n - 1) && rc.n_second <= n * (n - 1) && rc.third_sum >= 0.0);
        let brute_first = count_pairs(&s, |a, b| {
            let d = a.sub(b);
            vec3::dot(&[d[0] as f64, d[1] as f64, d[2] as f64], &frame.xi).abs() <= (n as f64).powf(3.0 / 7.0)
        });
        assert_eq!(rc.n_first, brute_first);
        assert!(regime_counts(&s, &frame, RegimeParams::Offset { c: 0.0, c_prime: 1.0 }).is_err());
    }

    #[test]
    fn regime_defaults() {
        let n = 128usize;
        let nf = n as f64;
        match RegimeParams::default_for(PlaneType::II, n, false) {
            RegimeParams::Angular { c, rho } => {
                assert!((c - nf.powf(3.0 / 7.0)).abs() < 1e-12 && (rho - nf.powf(-8.0 / 7.0)).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
        match RegimeParams::default_for(PlaneType::III, n, false) {
            RegimeParams::Angular { c, rho } => {
                assert!((c - nf.powf(1.0 / 14.0)).abs() < 1e-12 && (rho - nf.powf(-6.0 / 7.0)).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            RegimeParams::default_for(PlaneType::III, n, true),
            RegimeParams::Offset { c: nf.powf(0.2), c_prime: nf.powf(0.2) }
        );
    }

    #[test]
    fn psi_report() {
        let s = set(50);
        let kappa = kappa_exact(&s).unwrap();
        let alpha = [1.0, 2.0, 2.0];
        let segs = segments_around_points(&s, &alpha, 0.7, 10).unwrap();
        let rows = psi_bound_report(&s, PlaneType::I, &segs, kappa).unwrap();
        assert_eq!(rows.len(), 10);
        for row in &rows {
            assert!(row.count <= s.len() && row.count >= 1);
            for (_, ratio) in row.ratios() {
                assert!(ratio.is_finite() && ratio > 0.0);
            }
        }
        // h = 0 through a lattice point in a rational direction is a planar circle
        for p in s.points() {
            let v = p.0[2] as f64;
            let flat = Segment::new([0.0, 0.0, 1.0], v, v, 50).unwrap();
            let c = count_in_segment(&s, &flat).unwrap();
            assert!(c >= 1 && c <= kappa);
        }
    }
}
