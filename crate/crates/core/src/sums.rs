//! The stationary covariance of the restricted field, its gradient and
//! Hessian, the Kac-Rice integrand, the pairwise exponential sum `𝒢` over the
//! patch and the second-moment identities built from them.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{antipodal_pairs, FrequencySet};
use crate::plane::{Frame, PlaneType, ProjectionMatrix, FRAME_CONVENTION};
use crate::quad::{integrate_2d, QuadConfig, QuadResult};
use crate::reduce::{pairwise_sum, par_sum};
use crate::regions::ZERO_PROJECTION_TOL;
use crate::vec3::{self, Mat3, Vec3};

/// Sets larger than this fold ordered pairs by their difference vector before
/// summing; smaller sets use the plain double loop.
pub const FOLD_THRESHOLD: usize = 256;

/// `|x| < SERIES_CUTOFF / L` switches [`rect_factor_sq`] to its Taylor series.
pub const SERIES_CUTOFF: f64 = 1e-8;

/// In-plane displacement `(Δu, Δv)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Displacement {
    pub du: f64,
    pub dv: f64,
}

impl Displacement {
    pub fn new(du: f64, dv: f64) -> Self {
        Self { du, dv }
    }
}

/// `(r, D, H)` at one displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceJet {
    pub r: f64,
    pub grad: Vec3,
    pub hess: Mat3,
}

/// Real forms after antipodal cancellation, with `δ = Δu ξ + Δv η`:
/// `r = (1/N)Σ cos 2π⟨λ,δ⟩`, `D = −(2π/N)Σ sin 2π⟨λ,δ⟩ λ`,
/// `H = −(4π²/N)Σ cos 2π⟨λ,δ⟩ λλᵀ`.
pub fn covariance_jet(set: &FrequencySet, frame: &Frame, d: Displacement) -> CovarianceJet {
    let delta = frame.point(&[0.0; 3], d.du, d.dv);
    let pts = set.as_f64();
    let n = pts.len() as f64;
    let phases: Vec<(f64, f64)> = pts.iter().map(|l| (2.0 * PI * vec3::dot(l, &delta)).sin_cos()).collect();
    let sum = |f: &dyn Fn(usize) -> f64| -> f64 {
        let v: Vec<f64> = (0..pts.len()).map(f).collect();
        pairwise_sum(&v)
    };
    let r = sum(&|k| phases[k].1) / n;
    let mut grad = [0.0; 3];
    for (a, g) in grad.iter_mut().enumerate() {
        *g = -2.0 * PI / n * sum(&|k| phases[k].0 * pts[k][a]);
    }
    let mut hess = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let v = -4.0 * PI * PI / n * sum(&|k| phases[k].1 * pts[k][a] * pts[k][b]);
            hess[a][b] = v;
            hess[b][a] = v;
        }
    }
    CovarianceJet { r, grad, hess }
}

/// `r` between two absolute points `P + uξ + vη` and `P + u′ξ + v′η`,
/// computed from the points themselves rather than their difference.
pub fn covariance_between(set: &FrequencySet, frame: &Frame, offset: &Vec3, a: (f64, f64), b: (f64, f64)) -> f64 {
    let x = frame.point(offset, a.0, a.1);
    let y = frame.point(offset, b.0, b.1);
    let terms: Vec<f64> = set
        .as_f64()
        .iter()
        .map(|l| {
            let (s1, c1) = (2.0 * PI * vec3::dot(l, &x)).sin_cos();
            let (s2, c2) = (2.0 * PI * vec3::dot(l, &y)).sin_cos();
            // Re(e^{iθ₂} e^{−iθ₁})
            c2 * c1 + s2 * s1
        })
        .collect();
    pairwise_sum(&terms) / set.len() as f64
}

/// `|∫₀^L e^{2πiux} du|²`, equal to `L²` at `x = 0` and to
/// `sin²(πLx)/(πx)²` elsewhere.
pub fn rect_factor_sq(x: f64, len: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF / len {
        // L²·sin²z/z² with z = πLx
        let z2 = (PI * len * x).powi(2);
        return len * len * (1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 45.0);
    }
    let s = (PI * len * x).sin();
    s * s / (PI * x).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GSumResult {
    pub g_value: f64,
    /// Ordered pairs whose projections on `ξ` and `η` both vanish.
    pub n_zero_pairs: u64,
    pub frame_convention: &'static str,
}

fn difference_multiset(set: &FrequencySet) -> Vec<([i64; 3], u64)> {
    let pts = set.points();
    let map = (0..pts.len())
        .into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<[i64; 3], u64>, i| {
            for (j, q) in pts.iter().enumerate() {
                if j != i {
                    *acc.entry(pts[i].sub(q)).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut out: Vec<_> = map.into_iter().collect();
    out.sort_unstable();
    out
}

/// Applies `f` to every ordered pair difference and sums in a fixed order:
/// per-row sums for small sets, the sorted difference multiset otherwise.
fn fold_pairs<F>(set: &FrequencySet, f: F) -> f64
where
    F: Fn(&[i64; 3]) -> f64 + Sync + Send,
{
    let pts = set.points();
    if pts.len() <= FOLD_THRESHOLD {
        par_sum(pts.len(), |i| {
            let row: Vec<f64> = pts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| f(&pts[i].sub(q)))
                .collect();
            pairwise_sum(&row)
        })
    } else {
        let diffs = difference_multiset(set);
        let terms: Vec<f64> = diffs.par_iter().map(|(d, c)| *c as f64 * f(d)).collect();
        pairwise_sum(&terms)
    }
}

fn projections(d: &[i64; 3], frame: &Frame) -> (f64, f64) {
    let df = [d[0] as f64, d[1] as f64, d[2] as f64];
    (vec3::dot(&df, &frame.xi), vec3::dot(&df, &frame.eta))
}

/// `𝒢 = Σ_{λ≠λ′} |∫₀^A∫₀^B e^{2πi⟨λ−λ′, uξ+vη⟩} du dv|²` in closed form.
pub fn g_sum(set: &FrequencySet, frame: &Frame, a: f64, b: f64) -> Result<GSumResult> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::invalid("patch sides must be positive"));
    }
    let g_value = fold_pairs(set, |d| {
        let (x, y) = projections(d, frame);
        rect_factor_sq(x, a) * rect_factor_sq(y, b)
    });
    let pts = set.points();
    let n_zero_pairs = crate::reduce::par_count(pts.len(), |i| {
        pts.iter()
            .enumerate()
            .filter(|&(j, q)| {
                let (x, y) = projections(&pts[i].sub(q), frame);
                j != i && x.abs() <= ZERO_PROJECTION_TOL && y.abs() <= ZERO_PROJECTION_TOL
            })
            .count() as u64
    });
    Ok(GSumResult { g_value, n_zero_pairs, frame_convention: FRAME_CONVENTION })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrineqBound {
    pub value: f64,
    /// Set when `xy = 0` and only the trivial branch `A²B²` applies.
    pub degenerate: bool,
}

/// `min(A²B², 1/(π⁴x²y²))`, the explicit-constant bound on
/// `rect_factor_sq(x, A)·rect_factor_sq(y, B)`.
pub fn trineq_bound(x: f64, y: f64, a: f64, b: f64) -> TrineqBound {
    let trivial = a * a * b * b;
    if x * y == 0.0 {
        return TrineqBound { value: trivial, degenerate: true };
    }
    TrineqBound { value: trivial.min(1.0 / (PI.powi(4) * x * x * y * y)), degenerate: false }
}

/// The three terms of the Kac-Rice integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrTerms {
    pub r_sq: f64,
    pub grad_term: f64,
    pub hess_term: f64,
}

impl KrTerms {
    pub fn total(&self) -> f64 {
        self.r_sq + self.grad_term + self.hess_term
    }
}

pub fn kr_terms(jet: &CovarianceJet, omega: &ProjectionMatrix, m: u64) -> KrTerms {
    let m = m as f64;
    let od = vec3::mat_vec(&omega.omega, &jet.grad);
    let ho = vec3::mat_mul(&jet.hess, &omega.omega);
    KrTerms {
        r_sq: jet.r * jet.r,
        grad_term: vec3::dot(&jet.grad, &od) / m,
        hess_term: vec3::trace(&vec3::mat_mul(&ho, &ho)) / (m * m),
    }
}

/// `r² + DΩDᵀ/m + tr(HΩHΩ)/m²`.
pub fn kr_integrand(jet: &CovarianceJet, omega: &ProjectionMatrix, m: u64) -> f64 {
    kr_terms(jet, omega, m).total()
}

/// Which terms of the integrand enter a second-moment quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrandTerms {
    ROnly,
    Full,
}

/// Evaluates the integrand on a tensor grid of displacements with the
/// triangular weight `(A − |Δu|)(B − |Δv|)` applied. Only antipodal
/// representatives are summed; the partner doubles each term.
struct GridIntegrand {
    /// `(⟨λ,ξ⟩, ⟨λ,η⟩)` per representative.
    proj: Vec<(f64, f64)>,
    n: f64,
    m: f64,
    a: f64,
    b: f64,
    terms: IntegrandTerms,
}

impl GridIntegrand {
    fn new(set: &FrequencySet, frame: &Frame, a: f64, b: f64, terms: IntegrandTerms) -> Self {
        let proj = antipodal_pairs(set)
            .iter()
            .map(|(l, _)| {
                let lf = l.as_f64();
                (vec3::dot(&lf, &frame.xi), vec3::dot(&lf, &frame.eta))
            })
            .collect();
        Self { proj, n: set.len() as f64, m: set.m() as f64, a, b, terms }
    }

    fn eval(&self, us: &[f64], vs: &[f64]) -> Vec<f64> {
        let phase = |t: f64| (2.0 * PI * t).sin_cos();
        // e^{2πi v y_λ} per representative and v node
        let ev: Vec<Vec<(f64, f64)>> = self.proj.iter().map(|(_, y)| vs.iter().map(|v| phase(v * y)).collect()).collect();
        let rows: Vec<Vec<f64>> = us
            .par_iter()
            .map(|u| {
                let eu: Vec<(f64, f64)> = self.proj.iter().map(|(x, _)| phase(u * x)).collect();
                let wu = self.a - u.abs();
                vs.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let mut c_sum = 0.0;
                        let (mut sx, mut sy) = (0.0, 0.0);
                        let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
                        for (k, (x, y)) in self.proj.iter().enumerate() {
                            let (s1, c1) = eu[k];
                            let (s2, c2) = ev[k][j];
                            let c = c1 * c2 - s1 * s2;
                            c_sum += c;
                            if self.terms == IntegrandTerms::Full {
                                let s = s1 * c2 + c1 * s2;
                                sx += s * x;
                                sy += s * y;
                                hxx += c * x * x;
                                hxy += c * x * y;
                                hyy += c * y * y;
                            }
                        }
                        let r = 2.0 * c_sum / self.n;
                        let mut val = r * r;
                        if self.terms == IntegrandTerms::Full {
                            let g = -4.0 * PI / self.n;
                            let (dx, dy) = (g * sx, g * sy);
                            let h = -8.0 * PI * PI / self.n;
                            let (hxx, hxy, hyy) = (h * hxx, h * hxy, h * hyy);
                            val += (dx * dx + dy * dy) / self.m
                                + (hxx * hxx + 2.0 * hxy * hxy + hyy * hyy) / (self.m * self.m);
                        }
                        val * wu * (self.b - v.abs())
                    })
                    .collect()
            })
            .collect();
        rows.concat()
    }
}

fn quadrature(set: &FrequencySet, frame: &Frame, a: f64, b: f64, terms: IntegrandTerms, cfg: QuadConfig) -> Result<QuadResult> {
    let integrand = GridIntegrand::new(set, frame, a, b, terms);
    let res = integrate_2d(&[-a, 0.0, a], &[-b, 0.0, b], cfg, |us, vs| integrand.eval(us, vs))?;
    if !res.converged {
        return Err(Error::Numerical(format!(
            "second-moment quadrature did not converge (estimated error {:.3e} at {} panels)",
            res.error_estimate, res.panels
        )));
    }
    Ok(res)
}

/// Evaluate the fast projected integrand at one displacement, unweighted.
pub fn projected_integrand(set: &FrequencySet, frame: &Frame, d: Displacement, terms: IntegrandTerms) -> f64 {
    let integrand = GridIntegrand { a: 1.0, b: 1.0, ..GridIntegrand::new(set, frame, 1.0, 1.0, terms) };
    let w = (1.0 - d.du.abs()) * (1.0 - d.dv.abs());
    integrand.eval(&[d.du], &[d.dv])[0] / w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentR2 {
    /// `(AB)²/N + 𝒢/N²`.
    pub closed_form: f64,
    pub quadrature: QuadResult,
}

/// `∬_{Π²} r²` both from the exact diagonal/off-diagonal identity and from
/// quadrature of `∫∫ (A−|Δu|)(B−|Δv|) r(Δu,Δv)²`.
pub fn second_moment_r2(set: &FrequencySet, frame: &Frame, a: f64, b: f64) -> Result<SecondMomentR2> {
    second_moment_r2_with(set, frame, a, b, QuadConfig::default())
}

pub fn second_moment_r2_with(set: &FrequencySet, frame: &Frame, a: f64, b: f64, cfg: QuadConfig) -> Result<SecondMomentR2> {
    if set.is_empty() {
        return Err(Error::invalid("empty frequency set"));
    }
    let n = set.len() as f64;
    let g = g_sum(set, frame, a, b)?.g_value;
    let closed_form = (a * b).powi(2) / n + g / (n * n);
    let quadrature = quadrature(set, frame, a, b, IntegrandTerms::ROnly, cfg)?;
    Ok(SecondMomentR2 { closed_form, quadrature })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentFull {
    pub quadrature: QuadResult,
    /// `1/N + 𝒢/N²`.
    pub comparator: f64,
    pub ratio: f64,
}

/// Quadrature of the full Kac-Rice integrand over pairs of patch points,
/// reported against `1/N + 𝒢/N²`.
pub fn second_moment_full(
    set: &FrequencySet,
    frame: &Frame,
    omega: &ProjectionMatrix,
    a: f64,
    b: f64,
    terms: IntegrandTerms,
) -> Result<SecondMomentFull> {
    if set.is_empty() {
        return Err(Error::invalid("empty frequency set"));
    }
    let frame_omega = projection_matrix_of(frame);
    for i in 0..3 {
        for j in 0..3 {
            if (frame_omega[i][j] - omega.omega[i][j]).abs() > 1e-12 {
                return Err(Error::invalid("projection matrix does not belong to the frame's plane"));
            }
        }
    }
    let n = set.len() as f64;
    let g = g_sum(set, frame, a, b)?.g_value;
    let comparator = 1.0 / n + g / (n * n);
    let quadrature = quadrature(set, frame, a, b, terms, QuadConfig::default())?;
    Ok(SecondMomentFull { quadrature, comparator, ratio: quadrature.value / comparator })
}

/// `ξξᵀ + ηηᵀ`.
fn projection_matrix_of(frame: &Frame) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = frame.xi[i] * frame.xi[j] + frame.eta[i] * frame.eta[j];
        }
    }
    out
}

/// Whether the bound is unconditional or assumes the cap-count conjecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Unconditional,
    Conditional,
}

/// Explicit part of the variance bound, with `ε` factors and implied
/// constants dropped: `(m/N)κ` for rational planes, `(m/N)N^{3/7}` for type
/// (ii), `(m/N)N^{3/4}` for type (iii) and `(m/N)N^{1/2}` conditionally.
pub fn variance_bound(m: u64, n: usize, kappa: usize, plane_type: PlaneType, mode: BoundMode) -> f64 {
    let base = m as f64 / n as f64;
    let nf = n as f64;
    match (mode, plane_type) {
        (BoundMode::Conditional, _) => base * nf.sqrt(),
        (BoundMode::Unconditional, PlaneType::I) => base * kappa as f64,
        (BoundMode::Unconditional, PlaneType::II) => base * nf.powf(3.0 / 7.0),
        (BoundMode::Unconditional, PlaneType::III) => base * nf.powf(0.75),
    }
}
