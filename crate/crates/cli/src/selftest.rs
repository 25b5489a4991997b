//! Fast consistency checks: oracle equivalences and closed-form identities.

use std::f64::consts::PI;

use arwave::contour::{nodal_length, GridField};
use arwave::regions;
use arwave::sim::{grid_nodes, DEFAULT_DENSITY};
use arwave::sums::{self, rect_factor_sq, trineq_bound};
use arwave::{enumerate_frequencies, is_admissible, representation_count, Frame, FrequencySet};

use crate::oracle;

pub type CheckResult = Result<String, String>;

/// `𝒢` as seen by the identity checks; swapped out by mutation tests.
pub type GFn = dyn Fn(&FrequencySet, &Frame, f64, f64) -> f64;

pub fn library_g(set: &FrequencySet, frame: &Frame, a: f64, b: f64) -> f64 {
    sums::g_sum(set, frame, a, b).map(|g| g.g_value).unwrap_or(f64::NAN)
}

fn frame(n: [f64; 3]) -> Frame {
    Frame::from_normal(n).expect("nonzero normal")
}

pub fn r3_oracle(max_m: u64) -> CheckResult {
    let table = oracle::r3_table(max_m);
    for (m, &expected) in table.iter().enumerate().skip(1) {
        let got = representation_count(m as u64);
        if got != expected {
            return Err(format!("m = {m}: {got} != {expected}"));
        }
    }
    Ok(format!("m <= {max_m}"))
}

pub fn kappa_oracle(max_m: u64) -> CheckResult {
    let mut values = Vec::new();
    for m in (1..=max_m).filter(|&m| is_admissible(m)) {
        let set = enumerate_frequencies(m).map_err(|e| e.to_string())?;
        let got = regions::kappa_exact(&set).map_err(|e| e.to_string())?;
        let expected = oracle::kappa_recount(&oracle::sphere_points(m));
        if got != expected {
            return Err(format!("m = {m}: {got} != {expected}"));
        }
        values.push(got);
    }
    Ok(format!("admissible m <= {max_m}, first values {:?}", &values[..values.len().min(3)]))
}

pub fn g_examples(g: &GFn) -> CheckResult {
    let cases = [(1, [1.0, 0.0, 0.0], 2.0), (2, [0.0, 0.0, 1.0], 8.0)];
    for (m, n, expected) in cases {
        let set = enumerate_frequencies(m).map_err(|e| e.to_string())?;
        let got = g(&set, &frame(n), 1.0, 1.0);
        if (got - expected).abs() > 1e-12 {
            return Err(format!("m = {m}: G = {got}, expected {expected}"));
        }
    }
    Ok("G = 2 and G = 8".into())
}

/// `(AB)²/N + 𝒢/N²` against quadrature of `∬ r²`, including the `2/9` case.
pub fn appendix_identity(g: &GFn, configs: &[(u64, [f64; 3], f64, f64)]) -> CheckResult {
    let mut worst: f64 = 0.0;
    for &(m, n, a, b) in configs {
        let set = enumerate_frequencies(m).map_err(|e| e.to_string())?;
        let fr = frame(n);
        let nn = set.len() as f64;
        let closed = (a * b).powi(2) / nn + g(&set, &fr, a, b) / (nn * nn);
        let q = sums::second_moment_r2(&set, &fr, a, b).map_err(|e| e.to_string())?.quadrature;
        let diff = (closed - q.value).abs();
        let rel = diff / q.value.abs();
        if !(diff <= q.error_estimate && rel <= 1e-5) {
            return Err(format!("m = {m}, n = {n:?}, {a}x{b}: closed {closed} vs quadrature {} (err est {:e})", q.value, q.error_estimate));
        }
        worst = worst.max(rel);
    }
    let unit = enumerate_frequencies(1).map_err(|e| e.to_string())?;
    let closed = 1.0 / 6.0 + g(&unit, &frame([0.0, 0.0, 1.0]), 1.0, 1.0) / 36.0;
    if (closed - 2.0 / 9.0).abs() > 1e-14 {
        return Err(format!("unit sphere: {closed} != 2/9"));
    }
    Ok(format!("{} configs, worst relative gap {worst:.1e}", configs.len()))
}

pub fn pairwise_bound(m: u64, n: [f64; 3], a: f64, b: f64) -> CheckResult {
    let set = enumerate_frequencies(m).map_err(|e| e.to_string())?;
    let fr = frame(n);
    let pts = set.points();
    let mut checked = 0;
    for p in pts {
        for q in pts {
            let d = p.sub(q);
            let df = [d[0] as f64, d[1] as f64, d[2] as f64];
            let x: f64 = (0..3).map(|c| df[c] * fr.xi[c]).sum();
            let y: f64 = (0..3).map(|c| df[c] * fr.eta[c]).sum();
            if x == 0.0 || y == 0.0 {
                continue;
            }
            let lhs = rect_factor_sq(x, a) * rect_factor_sq(y, b);
            let bound = trineq_bound(x, y, a, b).value;
            if lhs > bound {
                return Err(format!("pair difference {d:?}: {lhs} > {bound}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs"))
}

pub fn marching_squares() -> CheckResult {
    let n = grid_nodes(1.0, 1, DEFAULT_DENSITY);
    let lines = GridField::from_fn(1.0, 1.0, n, n, |u, _| (2.0 * PI * u).cos()).map_err(|e| e.to_string())?;
    let l1 = nodal_length(&lines).length;
    let arc = GridField::from_fn(1.0, 1.0, n, n, |u, v| u * u + v * v - 0.25).map_err(|e| e.to_string())?;
    let l2 = nodal_length(&arc).length;
    if (l1 - oracle::COS_LINES_LENGTH).abs() > 1e-3 || (l2 - oracle::QUARTER_CIRCLE_LENGTH).abs() > 1e-2 {
        return Err(format!("lines {l1}, arc {l2}"));
    }
    Ok(format!("lines {l1:.6}, arc {l2:.6}"))
}

pub fn rect_factor() -> CheckResult {
    let got = rect_factor_sq(0.5, 1.0);
    let f = frame([1.0, 2f64.sqrt(), 3.0]);
    let quad = oracle::pair_integral_sq(&[1, -2, 1], &f, 0.7, 0.4);
    let d = [1.0, -2.0, 1.0];
    let x: f64 = (0..3).map(|c| d[c] * f.xi[c]).sum();
    let y: f64 = (0..3).map(|c| d[c] * f.eta[c]).sum();
    let closed = rect_factor_sq(x, 0.7) * rect_factor_sq(y, 0.4);
    if (got - 4.0 / (PI * PI)).abs() > 1e-15 || (closed - quad).abs() > 1e-9 * quad {
        return Err(format!("4/pi^2 check {got}, pair {closed} vs {quad}"));
    }
    Ok("closed form matches quadrature".into())
}

pub fn riesz_unit_sphere() -> CheckResult {
    let set = enumerate_frequencies(1).map_err(|e| e.to_string())?;
    let e = regions::riesz_energy(&set, 1.0).map_err(|e| e.to_string())?;
    // 24 ordered pairs at distance √2 and 6 at distance 2
    let expected = 24.0 / 2f64.sqrt() + 3.0;
    if (e.energy - expected).abs() > 1e-12 {
        return Err(format!("{} != {expected}", e.energy));
    }
    Ok(format!("energy {expected:.6}"))
}

/// The default check list with the library's `𝒢`.
pub fn checks(g: &GFn) -> Vec<(&'static str, CheckResult)> {
    let configs = [
        (5, [0.0, 0.0, 1.0], 1.0, 1.0),
        (29, [1.0, 2f64.sqrt(), 0.0], 0.6, 0.9),
        (41, [1.0, 2f64.sqrt(), 3f64.sqrt()], 0.8, 0.5),
    ];
    vec![
        ("r3 oracle", r3_oracle(2000)),
        ("kappa oracle", kappa_oracle(20)),
        ("G examples", g_examples(g)),
        ("second-moment identity", appendix_identity(g, &configs)),
        ("pair bound", pairwise_bound(29, [1.0, 2f64.sqrt(), 3f64.sqrt()], 1.0, 1.0)),
        ("rect factor", rect_factor()),
        ("marching squares", marching_squares()),
        ("riesz unit sphere", riesz_unit_sphere()),
    ]
}

/// Prints a pass/fail table; returns whether every check passed.
pub fn run_and_print(g: &GFn) -> bool {
    let results = checks(g);
    let mut ok = true;
    for (name, res) in &results {
        match res {
            Ok(detail) => println!("PASS  {name:<24} {detail}"),
            Err(detail) => {
                ok = false;
                println!("FAIL  {name:<24} {detail}");
            }
        }
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_g_is_caught() {
        let bad = |s: &FrequencySet, f: &Frame, a: f64, b: f64| 1.01 * library_g(s, f, a, b);
        assert!(g_examples(&bad).is_err());
        assert!(appendix_identity(&bad, &[(5, [0.0, 0.0, 1.0], 1.0, 1.0)]).is_err());
        assert!(appendix_identity(&library_g, &[(5, [0.0, 0.0, 1.0], 1.0, 1.0)]).is_ok());
    }
}
