//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use arwave::contour::{nodal_length, GridField};
use arwave::plane::PlaneSpec;
use arwave::regions::{self, RegimeParams};
use arwave::sim::{self, SimConfig, DEFAULT_DENSITY};
use arwave::sums::{self, rect_factor_sq, trineq_bound};
use arwave::{
    build_frame, enumerate_frequencies, is_admissible, representation_count, Frame, FrequencySet, PlaneType,
};
use arwave_cli::oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

/// A patch on a plane through the origin, drawn for the identity checks.
struct Config {
    m: u64,
    set: FrequencySet,
    frame: Frame,
    a: f64,
    b: f64,
}

fn random_configs(count: usize, seed: u64) -> Vec<Config> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let m = rng.random_range(1..=200u64);
        if !is_admissible(m) {
            continue;
        }
        let set = enumerate_frequencies(m).unwrap();
        if set.is_empty() {
            continue;
        }
        // alternate integer normals and generic directions
        let normal = if out.len() % 2 == 0 {
            loop {
                let n = [rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64];
                if n != [0.0; 3] {
                    break n;
                }
            }
        } else {
            [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.1..1.0)]
        };
        let frame = Frame::from_normal(normal).unwrap();
        let a = rng.random_range(0.05..=1.0);
        let b = rng.random_range(0.05..=1.0);
        out.push(Config { m, set, frame, a, b });
    }
    out
}

fn projections(d: &[i64; 3], frame: &Frame) -> (f64, f64) {
    let df = [d[0] as f64, d[1] as f64, d[2] as f64];
    let x = (0..3).map(|c| df[c] * frame.xi[c]).sum();
    let y = (0..3).map(|c| df[c] * frame.eta[c]).sum();
    (x, y)
}

fn r3_equivalence() -> Outcome {
    let max_m = 10_000;
    let table = oracle::r3_table(max_m);
    for (m, &expected) in table.iter().enumerate().skip(1) {
        let got = representation_count(m as u64);
        if got != expected {
            return Err(format!("m = {m}: {got} != brute force {expected}"));
        }
    }
    Ok(format!("all m <= {max_m} match"))
}

fn kappa_equivalence() -> Outcome {
    let mut small = Vec::new();
    let mut checked = 0;
    for m in (1..=50u64).filter(|&m| is_admissible(m)) {
        let set = enumerate_frequencies(m).unwrap();
        if set.is_empty() {
            continue;
        }
        let got = regions::kappa_exact(&set).map_err(|e| e.to_string())?;
        let expected = oracle::kappa_recount(&oracle::sphere_points(m));
        if got != expected {
            return Err(format!("m = {m}: {got} != recount {expected}"));
        }
        if m <= 3 {
            small.push(got);
        }
        checked += 1;
    }
    // frozen from the recount oracle
    if small != [4, 6, 4] {
        return Err(format!("kappa for m = 1, 2, 3 is {small:?}, oracle gives [4, 6, 4]"));
    }
    Ok(format!("{checked} admissible m <= 50 match; m = 1, 2, 3 give {small:?}"))
}

fn identity(configs: &[Config]) -> Outcome {
    let mut worst: f64 = 0.0;
    for c in configs {
        let res = sums::second_moment_r2(&c.set, &c.frame, c.a, c.b).map_err(|e| e.to_string())?;
        let diff = (res.closed_form - res.quadrature.value).abs();
        let rel = diff / res.closed_form;
        if diff > res.quadrature.error_estimate || rel > 1e-5 {
            return Err(format!(
                "m = {}, {}x{}: closed {} vs quadrature {} (estimate {:e})",
                c.m, c.a, c.b, res.closed_form, res.quadrature.value, res.quadrature.error_estimate
            ));
        }
        worst = worst.max(rel);
    }
    let unit = enumerate_frequencies(1).unwrap();
    let z = Frame::from_normal([0.0, 0.0, 1.0]).unwrap();
    let res = sums::second_moment_r2(&unit, &z, 1.0, 1.0).map_err(|e| e.to_string())?;
    let diff = (res.quadrature.value - 2.0 / 9.0).abs();
    if (res.closed_form - 2.0 / 9.0).abs() > 1e-15 || diff > res.quadrature.error_estimate {
        return Err(format!("unit sphere: closed {} quadrature {}", res.closed_form, res.quadrature.value));
    }
    Ok(format!("{} random configs plus 2/9, worst relative gap {worst:.2e}", configs.len()))
}

fn g_closed_form(configs: &[Config]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let c = &configs[k % configs.len()];
        let pts = c.set.points();
        let i = rng.random_range(0..pts.len());
        let j = loop {
            let j = rng.random_range(0..pts.len());
            if j != i {
                break j;
            }
        };
        let d = pts[i].sub(&pts[j]);
        let (x, y) = projections(&d, &c.frame);
        let closed = rect_factor_sq(x, c.a) * rect_factor_sq(y, c.b);
        let quad = oracle::pair_integral_sq(&d, &c.frame, c.a, c.b);
        let rel = (closed - quad).abs() / quad;
        if rel > 1e-9 {
            return Err(format!("pair {d:?} at m = {}: closed {closed} vs quadrature {quad}", c.m));
        }
        worst = worst.max(rel);
    }
    let cases = [(1, [1.0, 0.0, 0.0], 2.0), (2, [0.0, 0.0, 1.0], 8.0)];
    for (m, n, expected) in cases {
        let set = enumerate_frequencies(m).unwrap();
        let g = sums::g_sum(&set, &Frame::from_normal(n).unwrap(), 1.0, 1.0).unwrap().g_value;
        if (g - expected).abs() > 1e-12 {
            return Err(format!("m = {m}: G = {g}, expected {expected}"));
        }
    }
    Ok(format!("100 pairs, worst relative error {worst:.2e}; G = 2 and G = 8 exact"))
}

fn pair_bound(configs: &[Config]) -> Outcome {
    let mut checked = 0u64;
    for c in configs {
        let pts = c.set.points();
        for p in pts {
            for q in pts {
                let (x, y) = projections(&p.sub(q), &c.frame);
                if x == 0.0 || y == 0.0 {
                    continue;
                }
                let lhs = rect_factor_sq(x, c.a) * rect_factor_sq(y, c.b);
                let bound = trineq_bound(x, y, c.a, c.b).value;
                if lhs > bound {
                    return Err(format!("m = {}: {lhs} > {bound}", c.m));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} pairs with nonzero projections"))
}

const LENGTH_SWEEP: [u64; 7] = [1, 2, 3, 5, 6, 17, 29];

fn length_sweep() -> Result<Vec<sim::MomentEstimate>, String> {
    let frame = Frame::from_normal([0.0, 0.0, 1.0]).unwrap();
    let cfg = SimConfig { a: 1.0, b: 1.0, n_samples: 2000, seed: 0, density: DEFAULT_DENSITY, offset: [0.0; 3] };
    LENGTH_SWEEP
        .iter()
        .map(|&m| {
            let set = enumerate_frequencies(m).unwrap();
            sim::estimate_moments(&set, &frame, PlaneType::I, &cfg).map_err(|e| e.to_string())
        })
        .collect()
}

fn expected_length(sweep: &[sim::MomentEstimate]) -> Outcome {
    let mut parts = Vec::new();
    let mut bad = Vec::new();
    for e in sweep {
        let target = (e.m as f64).sqrt() * PI / 3f64.sqrt();
        let z = (e.mean - target) / e.se_mean;
        parts.push(format!("m={} z={z:+.2}", e.m));
        if z.abs() > 3.0 {
            bad.push(e.m);
        }
    }
    let detail = parts.join(", ");
    if bad.is_empty() {
        Ok(detail)
    } else {
        Err(format!("outside 3 standard errors for m = {bad:?}: {detail}"))
    }
}

fn variance_consistency(sweep: &[sim::MomentEstimate]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for e in sweep {
        let kappa = e.kappa.ok_or("rational plane without kappa")?;
        let ratio = e.variance * e.n as f64 / (e.m as f64 * kappa as f64);
        ok &= ratio.is_finite() && ratio < 10.0;
        parts.push(format!("m={} {ratio:.3}", e.m));
    }
    // regime counts with the default parameters, reported only
    for (label, normal, m) in [("ii", "1,1,sqrt(2)", 101u64), ("iii", "1,sqrt(2),sqrt(3)", 101)] {
        let spec = PlaneSpec::parse(normal, "1x1").unwrap();
        let t = spec.plane_type().unwrap();
        let frame = build_frame(&spec).unwrap();
        let set = enumerate_frequencies(m).unwrap();
        for conditional in [false, true] {
            let params = RegimeParams::default_for(t, set.len(), conditional);
            let rc = regions::regime_counts(&set, &frame, params).map_err(|e| e.to_string())?;
            let (c, second) = params.values();
            println!(
                "    regime type {label}{} m={m}: c={c:.4} second={second:.4e} first={} second={} third_sum={:.4e}",
                if conditional { " conditional" } else { "" },
                rc.n_first,
                rc.n_second,
                rc.third_sum
            );
        }
    }
    let detail = format!("Var*N/(m*kappa): {}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// For each cutoff, the admissible `m` at or below it with the most lattice
/// points (largest `m` on ties).
fn riesz_m_list() -> Vec<u64> {
    let cutoffs = [100u64, 200, 400, 800, 1600, 3200, 6400, 10_000];
    cutoffs
        .iter()
        .map(|&x| {
            (1..=x)
                .filter(|&m| is_admissible(m))
                .max_by_key(|&m| (representation_count(m), m))
                .unwrap()
        })
        .collect()
}

fn riesz_trend() -> Outcome {
    let ms = riesz_m_list();
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for s in [0.5, 1.0, 1.5] {
        let mut devs = Vec::new();
        let mut ratio_final = 0.0;
        let mut limit = 0.0;
        for &m in &ms {
            let set = enumerate_frequencies(m).unwrap();
            let e = regions::riesz_energy(&set, s).map_err(|e| e.to_string())?;
            devs.push((e.ratio - e.limit_constant).abs());
            ratio_final = e.ratio;
            limit = e.limit_constant;
        }
        let within = (ratio_final - limit).abs() <= 0.25 * limit;
        let half = devs.len() / 2;
        let decreasing = devs[half..].windows(2).all(|w| w[1] <= w[0]);
        lines.push(format!(
            "s={s}: final ratio {ratio_final:.5} vs {limit:.5}, last-half deviations {:?}",
            devs[half..].iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ));
        if !within {
            failures.push(format!("s={s} final ratio off by more than 25%"));
        }
        if !decreasing {
            failures.push(format!("s={s} deviation not weakly decreasing over the last half"));
        }
    }
    for l in &lines {
        println!("    {l}");
    }
    let detail = format!("m list {ms:?}");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

fn marching_squares() -> Outcome {
    let n = sim::grid_nodes(1.0, 1, DEFAULT_DENSITY);
    let lines = GridField::from_fn(1.0, 1.0, n, n, |u, _| (2.0 * PI * u).cos()).unwrap();
    let l1 = nodal_length(&lines).length;
    let arc = GridField::from_fn(1.0, 1.0, n, n, |u, v| u * u + v * v - 0.25).unwrap();
    let l2 = nodal_length(&arc).length;
    let e1 = (l1 - oracle::COS_LINES_LENGTH).abs();
    let e2 = (l2 - oracle::QUARTER_CIRCLE_LENGTH).abs();
    let detail = format!("{n}x{n} grid: lines {l1:.6} (err {e1:.1e}), arc {l2:.6} (err {e2:.1e})");
    if e1 <= 1e-3 && e2 <= 1e-2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_cli(args: &[&str], threads: usize) -> Result<Vec<Value>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_arwave"))
        .args(args)
        .args(["--threads", &threads.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

/// Numeric leaves by path, excluding wall-clock timings.
fn numeric_fields(v: &Value, path: &str, out: &mut Vec<(String, u64)>) {
    match v {
        Value::Number(n) if !path.ends_with("wall_time_s") => out.push((path.to_string(), n.as_f64().unwrap().to_bits())),
        Value::Object(map) => map.iter().for_each(|(k, v)| numeric_fields(v, &format!("{path}.{k}"), out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| numeric_fields(v, &format!("{path}[{i}]"), out)),
        _ => {}
    }
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["simulate", "--m", "17", "--samples", "300", "--seed", "11"],
        &["sweep", "--m-list", "3,5,6", "--normal", "1,2,sqrt(2)", "--samples", "100", "--seed", "4"],
        &["gsum", "--m-list", "29,41", "--normal", "1,sqrt(2),sqrt(3)", "--patch", "0.7x0.9"],
    ];
    let mut compared = 0;
    for args in runs {
        let mut fields = Vec::new();
        for threads in [1, 4] {
            let mut f = Vec::new();
            for (i, v) in run_cli(args, threads)?.iter().enumerate() {
                numeric_fields(v, &format!("[{i}]"), &mut f);
            }
            fields.push(f);
        }
        if fields[0] != fields[1] {
            return Err(format!("`{}` differs between 1 and 4 threads", args.join(" ")));
        }
        compared += fields[0].len();
    }
    Ok(format!("{compared} numeric fields bit-identical across 1 and 4 threads"))
}

fn report(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took {elapsed:.1?}, limit {limit:?}")),
        Err(d) => (false, d),
    };
    println!("{} criterion {id:>2} {name}: {detail} [{elapsed:.1?}]", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    results.push(report(1, "r3 oracle equivalence", secs(60), r3_equivalence));
    results.push(report(2, "kappa oracle equivalence", secs(30), kappa_equivalence));
    let configs = random_configs(20, 2718);
    results.push(report(3, "second-moment identity", secs(300), || identity(&configs)));
    results.push(report(4, "G closed form vs quadrature", secs(60), || g_closed_form(&configs)));
    results.push(report(5, "explicit pair bound", secs(60), || pair_bound(&configs)));
    let start = Instant::now();
    let sweep = length_sweep();
    let sweep_time = start.elapsed();
    results.push(report(6, "expected nodal length", secs(900).saturating_sub(sweep_time), || {
        sweep.as_ref().map_err(Clone::clone).and_then(|s| expected_length(s))
    }));
    results.push(report(7, "variance-bound consistency", secs(900), || {
        sweep.as_ref().map_err(Clone::clone).and_then(|s| variance_consistency(s))
    }));
    results.push(report(8, "Riesz energy trend", secs(120), riesz_trend));
    results.push(report(9, "marching-squares calibration", secs(10), marching_squares));
    results.push(report(10, "determinism across thread counts", secs(600), determinism));
    let passed = results.iter().filter(|r| **r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
