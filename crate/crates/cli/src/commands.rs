use std::time::Instant;

use arwave::plane::NormalInput;
use arwave::regions::{self, RegimeParams, DEFAULT_KAPPA_CEILING};
use arwave::sim::{self, SimConfig};
use arwave::sums::{self, BoundMode, IntegrandTerms};
use arwave::{build_frame, enumerate_frequencies, is_admissible, projection_matrix, Frame, FrequencySet, PlaneSpec, PlaneType};
use serde_json::Value;

use crate::config::RunConfig;
use crate::output::{self, num, Format, Record};
use crate::CliError;

/// Patch sides above this need `--force`.
pub const MAX_VALIDATED_SIDE: f64 = 1.0;

struct Plane {
    spec: PlaneSpec,
    plane_type: PlaneType,
    frame: Frame,
}

fn plane(cfg: &RunConfig) -> Result<Plane, CliError> {
    let normal: NormalInput = cfg.require("normal")?.parse()?;
    let (a, b) = arwave::plane::parse_patch(cfg.require("patch")?)?;
    if (a > MAX_VALIDATED_SIDE || b > MAX_VALIDATED_SIDE) && !cfg.flag("force")? {
        return Err(CliError::Invalid(format!(
            "patch sides above {MAX_VALIDATED_SIDE} are unvalidated; pass --force to run anyway"
        )));
    }
    let mut spec = PlaneSpec::new(normal, a, b)?;
    if let Some(t) = cfg.parsed::<PlaneType>("type")? {
        spec = spec.with_declared_type(t);
    }
    let plane_type = spec.plane_type()?;
    let frame = build_frame(&spec)?;
    Ok(Plane { spec, plane_type, frame })
}

fn frequencies(m: u64) -> Result<FrequencySet, CliError> {
    let set = enumerate_frequencies(m)?;
    if set.is_empty() {
        return Err(CliError::Invalid(format!("m = {m} is not a sum of three squares")));
    }
    Ok(set)
}

/// κ, or `None` when the set is beyond the enumeration ceiling.
fn kappa_if_feasible(set: &FrequencySet) -> Result<Option<usize>, CliError> {
    if set.len() > DEFAULT_KAPPA_CEILING {
        return Ok(None);
    }
    Ok(Some(regions::kappa_exact(set)?))
}

fn opt_usize(v: Option<usize>) -> Value {
    v.map(Value::from).unwrap_or(Value::Null)
}

fn format_of(cfg: &RunConfig) -> Result<Format, CliError> {
    cfg.required("format")
}

fn finish(cfg: &RunConfig, records: &[Record]) -> Result<(), CliError> {
    output::emit(cfg, &output::render(cfg, format_of(cfg)?, records))
}

pub fn lattice(cfg: &RunConfig) -> Result<(), CliError> {
    let m: u64 = cfg.required("m")?;
    let set = enumerate_frequencies(m)?;
    let text = match format_of(cfg)? {
        Format::Csv => output::csv_preamble(cfg) + &set.to_csv(),
        Format::Json => {
            let mut r = Record::new();
            r.insert("m".into(), Value::from(m));
            r.insert("N".into(), Value::from(set.len()));
            r.insert("points".into(), Value::from(set.points().iter().map(|p| p.0.to_vec()).collect::<Vec<_>>()));
            output::render(cfg, Format::Json, &[r])
        }
    };
    output::emit(cfg, &text)
}

pub fn kappa(cfg: &RunConfig) -> Result<(), CliError> {
    let mut records = Vec::new();
    for m in cfg.m_values()? {
        let set = frequencies(m)?;
        let mut r = Record::new();
        r.insert("m".into(), Value::from(m));
        r.insert("N".into(), Value::from(set.len()));
        r.insert("kappa".into(), Value::from(regions::kappa_exact(&set)?));
        records.push(r);
    }
    finish(cfg, &records)
}

pub fn regions(cfg: &RunConfig) -> Result<(), CliError> {
    let m: u64 = cfg.required("m")?;
    let set = frequencies(m)?;
    let pl = plane(cfg)?;
    let conditional = cfg.flag("conditional")?;
    let mut params = RegimeParams::default_for(pl.plane_type, set.len(), conditional);
    let c = cfg.parsed::<f64>("c")?;
    let rho = cfg.parsed::<f64>("rho")?;
    let c_prime = cfg.parsed::<f64>("c-prime")?;
    if rho.is_some() && c_prime.is_some() {
        return Err(CliError::Invalid("give either --rho or --c-prime, not both".into()));
    }
    let (c0, second0) = params.values();
    let c = c.unwrap_or(c0);
    params = match (params, rho, c_prime) {
        (_, Some(rho), _) => RegimeParams::Angular { c, rho },
        (_, _, Some(c_prime)) => RegimeParams::Offset { c, c_prime },
        (RegimeParams::Angular { .. }, None, None) => RegimeParams::Angular { c, rho: second0 },
        (RegimeParams::Offset { .. }, None, None) => RegimeParams::Offset { c, c_prime: second0 },
    };
    let counts = regions::regime_counts(&set, &pl.frame, params)?;
    let (c, second) = params.values();
    let mut r = Record::new();
    r.insert("m".into(), Value::from(m));
    r.insert("N".into(), Value::from(set.len()));
    r.insert("kappa".into(), opt_usize(kappa_if_feasible(&set)?));
    r.insert("plane_type".into(), Value::from(pl.plane_type.to_string()));
    r.insert(
        "regime".into(),
        Value::from(match params {
            RegimeParams::Angular { .. } => "angular",
            RegimeParams::Offset { .. } => "offset",
        }),
    );
    r.insert("c".into(), num(c));
    r.insert("rho_or_cprime".into(), num(second));
    r.insert("n_first".into(), Value::from(counts.n_first));
    r.insert("n_second".into(), Value::from(counts.n_second));
    r.insert("n_third".into(), Value::from(counts.n_third));
    r.insert("third_sum".into(), num(counts.third_sum));
    if let Some(s) = cfg.parsed::<f64>("cap-s")? {
        let (chi_u, chi_c) = regions::chi_bounds(set.radius(), s);
        r.insert("cap_s".into(), num(s));
        r.insert("max_cap_count".into(), Value::from(regions::max_cap_count(&set, s)?));
        r.insert("chi_unconditional".into(), num(chi_u));
        r.insert("chi_conditional".into(), num(chi_c));
    }
    finish(cfg, &[r])
}

pub fn riesz(cfg: &RunConfig) -> Result<(), CliError> {
    let exponents: Vec<f64> = cfg.list("s")?.unwrap_or_default();
    let mut records = Vec::new();
    for m in cfg.m_values()? {
        let set = frequencies(m)?;
        for &s in &exponents {
            let e = regions::riesz_energy(&set, s)?;
            let mut r = Record::new();
            r.insert("m".into(), Value::from(m));
            r.insert("N".into(), Value::from(e.n));
            r.insert("s".into(), num(s));
            r.insert("energy".into(), num(e.energy));
            r.insert("ratio".into(), num(e.ratio));
            r.insert("limit_constant".into(), num(e.limit_constant));
            records.push(r);
        }
    }
    finish(cfg, &records)
}

pub fn gsum(cfg: &RunConfig) -> Result<(), CliError> {
    let pl = plane(cfg)?;
    let omega = projection_matrix(&pl.frame.normal)?;
    let (a, b) = (pl.spec.a, pl.spec.b);
    let mut records = Vec::new();
    for m in cfg.m_values()? {
        let set = frequencies(m)?;
        let kappa = kappa_if_feasible(&set)?;
        let g = sums::g_sum(&set, &pl.frame, a, b)?;
        let r2 = sums::second_moment_r2(&set, &pl.frame, a, b)?;
        let full = sums::second_moment_full(&set, &pl.frame, &omega, a, b, IntegrandTerms::Full)?;
        let vb = match (pl.plane_type, kappa) {
            (PlaneType::I, None) => None,
            _ => Some(sums::variance_bound(m, set.len(), kappa.unwrap_or(0), pl.plane_type, BoundMode::Unconditional)),
        };
        let mut r = Record::new();
        r.insert("m".into(), Value::from(m));
        r.insert("N".into(), Value::from(set.len()));
        r.insert("kappa".into(), opt_usize(kappa));
        r.insert("G".into(), num(g.g_value));
        r.insert("var_bound".into(), vb.map(num).unwrap_or(Value::Null));
        r.insert("second_moment_r2_closed".into(), num(r2.closed_form));
        r.insert("second_moment_full".into(), num(full.quadrature.value));
        r.insert("ratio_lemma41".into(), num(full.ratio));
        r.insert("n_zero_pairs".into(), Value::from(g.n_zero_pairs));
        r.insert("plane_type".into(), Value::from(pl.plane_type.to_string()));
        r.insert("frame_convention".into(), Value::from(g.frame_convention));
        records.push(r);
    }
    finish(cfg, &records)
}

pub fn krbound(cfg: &RunConfig) -> Result<(), CliError> {
    let m: u64 = cfg.required("m")?;
    let set = frequencies(m)?;
    let pl = plane(cfg)?;
    let omega = projection_matrix(&pl.frame.normal)?;
    let terms = match cfg.require("terms")? {
        "full" => IntegrandTerms::Full,
        "r2" => IntegrandTerms::ROnly,
        other => return Err(CliError::Invalid(format!("unknown --terms `{other}`, expected full or r2"))),
    };
    let mode = match cfg.require("mode")? {
        "unconditional" => BoundMode::Unconditional,
        "conditional" => BoundMode::Conditional,
        other => return Err(CliError::Invalid(format!("unknown --mode `{other}`"))),
    };
    let (a, b) = (pl.spec.a, pl.spec.b);
    let r2 = sums::second_moment_r2(&set, &pl.frame, a, b)?;
    let full = sums::second_moment_full(&set, &pl.frame, &omega, a, b, terms)?;
    let kappa = kappa_if_feasible(&set)?;
    let mut r = Record::new();
    r.insert("m".into(), Value::from(m));
    r.insert("N".into(), Value::from(set.len()));
    r.insert("plane_type".into(), Value::from(pl.plane_type.to_string()));
    r.insert("kappa".into(), opt_usize(kappa));
    r.insert("second_moment_r2_closed".into(), num(r2.closed_form));
    r.insert("second_moment_r2_quadrature".into(), num(r2.quadrature.value));
    r.insert("second_moment_r2_error".into(), num(r2.quadrature.error_estimate));
    r.insert("second_moment_full".into(), num(full.quadrature.value));
    r.insert("second_moment_full_error".into(), num(full.quadrature.error_estimate));
    r.insert("comparator".into(), num(full.comparator));
    r.insert("ratio_lemma41".into(), num(full.ratio));
    let vb = match (pl.plane_type, mode, kappa) {
        (PlaneType::I, BoundMode::Unconditional, None) => Value::Null,
        _ => num(sums::variance_bound(m, set.len(), kappa.unwrap_or(0), pl.plane_type, mode)),
    };
    r.insert("variance_bound".into(), vb);
    finish(cfg, &[r])
}

fn sim_config(cfg: &RunConfig, pl: &Plane) -> Result<SimConfig, CliError> {
    let offset: Vec<f64> = cfg.list("offset")?.unwrap_or_else(|| vec![0.0; 3]);
    let offset: [f64; 3] = offset
        .try_into()
        .map_err(|_| CliError::Invalid("--offset needs three comma-separated numbers".into()))?;
    Ok(SimConfig {
        a: pl.spec.a,
        b: pl.spec.b,
        offset,
        n_samples: cfg.required("samples")?,
        seed: cfg.required("seed")?,
        density: cfg.required("density")?,
    })
}

fn check_admissible(cfg: &RunConfig, m: u64) -> Result<(), CliError> {
    if !is_admissible(m) && !cfg.flag("force")? {
        return Err(CliError::Invalid(format!("m = {m} is not admissible (m mod 8 in {{0, 4, 7}}); pass --force to run anyway")));
    }
    Ok(())
}

fn simulate_one(cfg: &RunConfig, pl: &Plane, sc: &SimConfig, m: u64) -> Result<(Record, sim::MomentEstimate), CliError> {
    check_admissible(cfg, m)?;
    let set = frequencies(m)?;
    let start = Instant::now();
    let est = sim::estimate_moments(&set, &pl.frame, pl.plane_type, sc)?;
    let wall = start.elapsed().as_secs_f64();
    let mut r = Record::new();
    r.insert("m".into(), Value::from(m));
    r.insert("N".into(), Value::from(est.n));
    r.insert("plane_type".into(), Value::from(pl.plane_type.to_string()));
    r.insert("kappa".into(), opt_usize(est.kappa));
    r.insert("n_samples".into(), Value::from(est.n_samples));
    r.insert("mean".into(), num(est.mean));
    r.insert("variance".into(), num(est.variance));
    r.insert("se_mean".into(), num(est.se_mean));
    r.insert("se_variance".into(), num(est.se_variance));
    r.insert("expected_length".into(), num(est.expected_length));
    r.insert("variance_bound".into(), num(est.variance_bound));
    r.insert("variance_ratio".into(), num(est.variance / est.variance_bound));
    r.insert("flagged_samples".into(), Value::from(est.flagged_samples));
    r.insert("grid_nodes_u".into(), Value::from(sim::grid_nodes(sc.a, m, sc.density)));
    r.insert("grid_nodes_v".into(), Value::from(sim::grid_nodes(sc.b, m, sc.density)));
    r.insert("generator".into(), Value::from(est.generator));
    r.insert("seed_mixing".into(), Value::from(sim::SEED_MIX));
    r.insert("wall_time_s".into(), num(wall));
    Ok((r, est))
}

fn per_sample_csv(cfg: &RunConfig, rows: &[(u64, &[f64])]) -> Result<(), CliError> {
    let Some(path) = cfg.get("per-sample") else {
        return Ok(());
    };
    let mut text = output::csv_preamble(cfg);
    text.push_str("m,sample_index,length\n");
    for (m, lengths) in rows {
        for (i, l) in lengths.iter().enumerate() {
            text.push_str(&format!("{m},{i},{l}\n"));
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::Failed(format!("cannot write `{path}`: {e}")))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let m: u64 = cfg.required("m")?;
    let pl = plane(cfg)?;
    let sc = sim_config(cfg, &pl)?;
    let (r, est) = simulate_one(cfg, &pl, &sc, m)?;
    per_sample_csv(cfg, &[(m, &est.lengths)])?;
    finish(cfg, &[r])
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let ms: Vec<u64> = cfg.list("m-list")?.ok_or_else(|| CliError::Invalid("--m-list is required".into()))?;
    let epsilon: f64 = cfg.required("epsilon")?;
    let pl = plane(cfg)?;
    let sc = sim_config(cfg, &pl)?;
    let mut records = Vec::new();
    let mut estimates = Vec::new();
    for &m in &ms {
        let (mut r, est) = simulate_one(cfg, &pl, &sc, m)?;
        let row = sim::concentration_row(&est, sc.a, sc.b, epsilon);
        r.insert("epsilon".into(), num(epsilon));
        r.insert("concentration_probability".into(), num(row.probability));
        records.push(r);
        estimates.push((m, est));
    }
    let rows: Vec<(u64, &[f64])> = estimates.iter().map(|(m, e)| (*m, e.lengths.as_slice())).collect();
    per_sample_csv(cfg, &rows)?;
    finish(cfg, &records)
}
