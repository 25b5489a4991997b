//! Monte Carlo sampling of the arithmetic random wave and its nodal
//! intersection length with a planar patch.

use std::f64::consts::PI;

use num::complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::contour::{nodal_length, GridField};
use crate::error::{Error, Result};
use crate::lattice::{antipodal_pairs, Frequency, FrequencySet};
use crate::plane::{Frame, PlaneType};
use crate::reduce::pairwise_sum;
use crate::regions::kappa_exact;
use crate::sums::{variance_bound, BoundMode};
use crate::vec3::{self, Vec3};

pub const GENERATOR: &str = "ChaCha8Rng";
pub const SEED_MIX: &str = "splitmix64(master + (i + 1) * 0x9E3779B97F4A7C15)";
/// Grid nodes per wavelength `1/√m`.
pub const DEFAULT_DENSITY: f64 = 20.0;
pub const MIN_DENSITY: f64 = 10.0;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed of sample `i` under master seed `master`.
pub fn sample_seed(master: u64, i: u64) -> u64 {
    splitmix64(master.wrapping_add((i + 1).wrapping_mul(0x9E3779B97F4A7C15)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveSample {
    pub m: u64,
    /// Total number of frequencies `N`; the partner `−λ` carries `conj(a_λ)`.
    pub n: usize,
    pub representatives: Vec<(Frequency, Complex64)>,
    pub seed: u64,
}

impl WaveSample {
    /// Field value at `x` from the real pairing over representatives.
    pub fn value_at(&self, x: &Vec3) -> f64 {
        let terms: Vec<f64> = self
            .representatives
            .iter()
            .map(|(l, a)| {
                let (s, c) = (2.0 * PI * vec3::dot(&l.as_f64(), x)).sin_cos();
                a.re * c - a.im * s
            })
            .collect();
        2.0 / (self.n as f64).sqrt() * pairwise_sum(&terms)
    }

    /// The full sum over all `N` frequencies; the imaginary part vanishes up
    /// to rounding.
    pub fn value_full(&self, x: &Vec3) -> Complex64 {
        let norm = 1.0 / (self.n as f64).sqrt();
        self.representatives
            .iter()
            .map(|(l, a)| {
                let e = Complex64::from_polar(1.0, 2.0 * PI * vec3::dot(&l.as_f64(), x));
                a * e + a.conj() * e.conj()
            })
            .sum::<Complex64>()
            * norm
    }
}

/// Draw `a_λ` with independent `N(0, 1/2)` real and imaginary parts for each
/// antipodal representative.
pub fn sample_wave(set: &FrequencySet, seed: u64) -> Result<WaveSample> {
    if set.len() < 2 {
        return Err(Error::invalid("need at least one antipodal pair"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.5f64.sqrt()).expect("valid deviation");
    let representatives = antipodal_pairs(set)
        .into_iter()
        .map(|(l, _)| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            (l, Complex64::new(re, im))
        })
        .collect();
    Ok(WaveSample { m: set.m(), n: set.len(), representatives, seed })
}

/// Node count per side for a patch side `len` at `density` nodes per
/// wavelength.
pub fn grid_nodes(len: f64, m: u64, density: f64) -> usize {
    let h = 1.0 / (density * (m as f64).sqrt());
    (len / h).ceil() as usize + 1
}

/// `f(u, v) = F(P + uξ + vη)` on `nu × nv` nodes over `[0, a] × [0, b]`,
/// with cell centers.
pub fn evaluate_restricted(
    sample: &WaveSample,
    frame: &Frame,
    offset: &Vec3,
    a: f64,
    b: f64,
    nu: usize,
    nv: usize,
) -> Result<GridField> {
    if nu < 2 || nv < 2 {
        return Err(Error::invalid("grid needs at least 2 nodes per side"));
    }
    let hu = a / (nu - 1) as f64;
    let hv = b / (nv - 1) as f64;
    let norm = 2.0 / (sample.n as f64).sqrt();
    // a_λ e^{2πi⟨λ,P⟩}, ⟨λ,ξ⟩, ⟨λ,η⟩
    let reps: Vec<(Complex64, f64, f64)> = sample
        .representatives
        .iter()
        .map(|(l, c)| {
            let lf = l.as_f64();
            let base = c * Complex64::from_polar(1.0, 2.0 * PI * vec3::dot(&lf, offset));
            (base, vec3::dot(&lf, &frame.xi), vec3::dot(&lf, &frame.eta))
        })
        .collect();
    let phase = |t: f64| Complex64::from_polar(1.0, 2.0 * PI * t);
    let table = |coords: &[f64], pick: fn(&(Complex64, f64, f64)) -> f64| -> Vec<Vec<Complex64>> {
        reps.iter().map(|r| coords.iter().map(|t| phase(t * pick(r))).collect()).collect()
    };
    let us: Vec<f64> = (0..nu).map(|i| i as f64 * hu).collect();
    let vs: Vec<f64> = (0..nv).map(|j| j as f64 * hv).collect();
    let uc: Vec<f64> = (0..nu - 1).map(|i| (i as f64 + 0.5) * hu).collect();
    let vc: Vec<f64> = (0..nv - 1).map(|j| (j as f64 + 0.5) * hv).collect();
    let grid = |uu: &[f64], vv: &[f64]| -> Vec<f64> {
        let vt = table(vv, |r| r.2);
        uu.par_iter()
            .flat_map_iter(|u| {
                let w: Vec<Complex64> = reps.iter().map(|r| r.0 * phase(u * r.1)).collect();
                let vt = &vt;
                (0..vv.len()).map(move |j| {
                    let terms: Vec<f64> = w.iter().zip(vt).map(|(w, row)| (w * row[j]).re).collect();
                    norm * pairwise_sum(&terms)
                })
            })
            .collect()
    };
    let values = grid(&us, &vs);
    let centers = grid(&uc, &vc);
    Ok(GridField { values, centers: Some(centers), nu, nv, hu, hv })
}

/// Nodal length of a field sampled from a wave of frequency `m`, refusing
/// grids coarser than `1/(MIN_DENSITY·√m)`.
pub fn nodal_length_checked(field: &GridField, m: u64) -> Result<crate::contour::NodalLength> {
    let max_step = 1.0 / (MIN_DENSITY * (m as f64).sqrt());
    if field.hu > max_step * (1.0 + 1e-12) || field.hv > max_step * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "grid step {:.3e} exceeds 1/(10*sqrt(m)) = {max_step:.3e}",
            field.hu.max(field.hv)
        )));
    }
    Ok(nodal_length(field))
}

/// `E[L] = √m·AB·π/√3`.
pub fn expected_length(m: u64, a: f64, b: f64) -> f64 {
    (m as f64).sqrt() * a * b * PI / 3f64.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub a: f64,
    pub b: f64,
    pub offset: Vec3,
    pub n_samples: usize,
    pub seed: u64,
    pub density: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, offset: [0.0; 3], n_samples: 2000, seed: 0, density: DEFAULT_DENSITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub m: u64,
    pub n: usize,
    pub n_samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub expected_length: f64,
    pub variance_bound: f64,
    pub kappa: Option<usize>,
    /// Samples with an exact zero at some grid node.
    pub flagged_samples: usize,
    pub lengths: Vec<f64>,
    pub generator: &'static str,
}

/// Runs `n_samples` independent draws and summarizes the nodal length.
pub fn estimate_moments(set: &FrequencySet, frame: &Frame, plane_type: PlaneType, cfg: &SimConfig) -> Result<MomentEstimate> {
    if cfg.n_samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    if cfg.density < MIN_DENSITY {
        return Err(Error::invalid(format!("grid density must be at least {MIN_DENSITY}")));
    }
    if !(cfg.a > 0.0 && cfg.b > 0.0) {
        return Err(Error::invalid("patch sides must be positive"));
    }
    let m = set.m();
    let nu = grid_nodes(cfg.a, m, cfg.density);
    let nv = grid_nodes(cfg.b, m, cfg.density);
    let runs: Vec<(f64, bool)> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let sample = sample_wave(set, sample_seed(cfg.seed, i as u64))?;
            let field = evaluate_restricted(&sample, frame, &cfg.offset, cfg.a, cfg.b, nu, nv)?;
            let res = nodal_length_checked(&field, m)?;
            Ok((res.length, res.zero_nodes > 0))
        })
        .collect::<Result<_>>()?;
    let lengths: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let flagged_samples = runs.iter().filter(|r| r.1).count();
    let n = lengths.len() as f64;
    let mean = pairwise_sum(&lengths) / n;
    let dev = |p: i32| -> f64 {
        let v: Vec<f64> = lengths.iter().map(|l| (l - mean).powi(p)).collect();
        pairwise_sum(&v)
    };
    let m2 = dev(2);
    let variance = m2 / (n - 1.0);
    let se_mean = (variance / n).sqrt();
    // large-sample standard error of the unbiased variance
    let mu4 = dev(4) / n;
    let s2 = m2 / n;
    let se_variance = ((mu4 - (n - 3.0) / (n - 1.0) * s2 * s2).max(0.0) / n).sqrt();
    let kappa = match plane_type {
        PlaneType::I => Some(kappa_exact(set)?),
        _ => None,
    };
    let vb = variance_bound(m, set.len(), kappa.unwrap_or(0), plane_type, BoundMode::Unconditional);
    Ok(MomentEstimate {
        m,
        n: set.len(),
        n_samples: cfg.n_samples,
        mean,
        variance,
        se_mean,
        se_variance,
        expected_length: expected_length(m, cfg.a, cfg.b),
        variance_bound: vb,
        kappa,
        flagged_samples,
        lengths,
        generator: GENERATOR,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub m: u64,
    pub n: usize,
    pub epsilon: f64,
    pub n_samples: usize,
    pub probability: f64,
}

/// Empirical `P(|L/√m − (π/√3)·AB| > ε)` from the per-sample lengths.
pub fn concentration_row(est: &MomentEstimate, a: f64, b: f64, epsilon: f64) -> ConcentrationRow {
    let target = PI / 3f64.sqrt() * a * b;
    let sq = (est.m as f64).sqrt();
    let hits = est.lengths.iter().filter(|l| (*l / sq - target).abs() > epsilon).count();
    ConcentrationRow {
        m: est.m,
        n: est.n,
        epsilon,
        n_samples: est.lengths.len(),
        probability: hits as f64 / est.lengths.len() as f64,
    }
}

/// One row per `m` of the concentration table.
pub fn probability_concentration_report(
    ms: &[u64],
    frame: &Frame,
    plane_type: PlaneType,
    cfg: &SimConfig,
    epsilon: f64,
) -> Result<Vec<ConcentrationRow>> {
    ms.iter()
        .map(|&m| {
            let set = crate::lattice::enumerate_frequencies(m)?;
            let est = estimate_moments(&set, frame, plane_type, cfg)?;
            Ok(concentration_row(&est, cfg.a, cfg.b, epsilon))
        })
        .collect()
}
