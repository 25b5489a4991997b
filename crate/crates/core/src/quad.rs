//! Composite Gauss-Legendre quadrature on rectangles.
//!
//! Integrands are evaluated on a whole tensor grid at once so callers can use
//! separable phase factors instead of pointwise trigonometry.

use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and P_{n-1}
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule on the union of intervals `[breaks[k], breaks[k+1]]`, each
/// split into `panels` equal panels.
pub fn composite_rule(breaks: &[f64], panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for pair in breaks.windows(2) {
        let h = (pair[1] - pair[0]) / panels as f64;
        for p in 0..panels {
            let a = pair[0] + p as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                xs.push(a + 0.5 * h * (x + 1.0));
                ws.push(0.5 * h * w);
            }
        }
    }
    (xs, ws)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// `|Q_p − Q_{p/2}|` plus a rounding floor proportional to `∫|f|`.
    pub error_estimate: f64,
    /// Panels per interval at the accepted level.
    pub panels: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub order: usize,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { order: 16, rel_tol: 1e-6, max_panels: 256 }
    }
}

fn tensor_sum(values: &[f64], wx: &[f64], wy: &[f64]) -> (f64, f64) {
    let ny = wy.len();
    let rows: Vec<(f64, f64)> = wx
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let row = &values[i * ny..(i + 1) * ny];
            let s: Vec<f64> = row.iter().zip(wy).map(|(v, wy)| v * wy).collect();
            let a: Vec<f64> = row.iter().zip(wy).map(|(v, wy)| (v * wy).abs()).collect();
            (w * pairwise_sum(&s), w.abs() * pairwise_sum(&a))
        })
        .collect();
    let v: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let a: Vec<f64> = rows.iter().map(|r| r.1).collect();
    (pairwise_sum(&v), pairwise_sum(&a))
}

/// Integrate over the rectangle with the given breakpoints, doubling the
/// panel count until successive levels agree to `rel_tol`. `eval` receives
/// the x and y nodes and returns the row-major grid of integrand values.
pub fn integrate_2d<F>(breaks_x: &[f64], breaks_y: &[f64], cfg: QuadConfig, mut eval: F) -> Result<QuadResult>
where
    F: FnMut(&[f64], &[f64]) -> Vec<f64>,
{
    let mut prev: Option<f64> = None;
    let mut panels = 1;
    loop {
        let (xs, wx) = composite_rule(breaks_x, panels, cfg.order);
        let (ys, wy) = composite_rule(breaks_y, panels, cfg.order);
        let values = eval(&xs, &ys);
        debug_assert_eq!(values.len(), xs.len() * ys.len());
        let (q, q_abs) = tensor_sum(&values, &wx, &wy);
        if !q.is_finite() {
            return Err(Error::Numerical("non-finite quadrature value".into()));
        }
        if let Some(p) = prev {
            let diff = (q - p).abs();
            let floor = 64.0 * f64::EPSILON * q_abs;
            let converged = diff <= cfg.rel_tol * q.abs().max(q_abs * 1e-3) || diff <= floor;
            if converged || panels >= cfg.max_panels {
                return Ok(QuadResult { value: q, error_estimate: diff + floor, panels, converged });
            }
        }
        prev = Some(q);
        panels *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n = {n}");
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-12, "n = {n}, deg = {deg}");
            }
        }
    }

    #[test]
    fn oscillatory_2d() {
        // ∫₀¹∫₀¹ (1 − x)·cos²(2π·5.3·y) dx dy
        let f = |x: f64, y: f64| (1.0 - x) * (2.0 * std::f64::consts::PI * 5.3 * y).cos().powi(2);
        let res = integrate_2d(&[0.0, 1.0], &[0.0, 1.0], QuadConfig::default(), |xs, ys| {
            xs.iter().flat_map(|x| ys.iter().map(move |y| f(*x, *y))).collect()
        })
        .unwrap();
        let k = 2.0 * std::f64::consts::PI * 5.3;
        let exact = 0.5 * (0.5 + (2.0 * k).sin() / (4.0 * k));
        assert!(res.converged);
        assert!((res.value - exact).abs() < 1e-12);
        assert!((res.value - exact).abs() <= res.error_estimate);
    }
}
