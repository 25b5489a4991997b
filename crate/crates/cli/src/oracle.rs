//! Brute-force reference computations used by `selftest` and the acceptance
//! suite. None of these share code paths with the routines they check.

use std::f64::consts::PI;

use arwave::quad::composite_rule;
use arwave::Frame;

/// `table[m]` = number of integer triples with `x² + y² + z² = m`, for
/// `m ≤ max_m`, by a single pass over the enclosing cube.
pub fn r3_table(max_m: u64) -> Vec<u64> {
    let r = (max_m as f64).sqrt() as i64 + 1;
    let mut table = vec![0u64; max_m as usize + 1];
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let n = (x * x + y * y + z * z) as u64;
                if n <= max_m {
                    table[n as usize] += 1;
                }
            }
        }
    }
    table
}

/// Points with `x² + y² + z² = m` by scanning the cube.
pub fn sphere_points(m: u64) -> Vec<[i64; 3]> {
    let r = (m as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                if (x * x + y * y + z * z) as u64 == m {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

fn sub(a: &[i64; 3], b: &[i64; 3]) -> [i64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[i64; 3], b: &[i64; 3]) -> [i64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[i64; 3], b: &[i64; 3]) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Largest number of points on one plane: for every triple, the plane it
/// spans is re-counted against the whole set in integer arithmetic.
pub fn kappa_recount(points: &[[i64; 3]]) -> usize {
    let n = points.len();
    let mut best = n.min(2);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let normal = cross(&sub(&points[j], &points[i]), &sub(&points[k], &points[i]));
                if normal == [0, 0, 0] {
                    continue;
                }
                let count = points.iter().filter(|q| dot(&normal, &sub(q, &points[i])) == 0).count();
                best = best.max(count);
            }
        }
    }
    best
}

/// `|∫₀^A∫₀^B e^{2πi⟨d, uξ+vη⟩} du dv|²` by tensor Gauss-Legendre on the
/// unseparated phase.
pub fn pair_integral_sq(d: &[i64; 3], frame: &Frame, a: f64, b: f64) -> f64 {
    let df = [d[0] as f64, d[1] as f64, d[2] as f64];
    let norm = (df[0] * df[0] + df[1] * df[1] + df[2] * df[2]).sqrt();
    // about four panels per wavelength along the longer side
    let panels = (4.0 * norm * a.max(b)).ceil() as usize + 2;
    let (us, wu) = composite_rule(&[0.0, a], panels, 20);
    let (vs, wv) = composite_rule(&[0.0, b], panels, 20);
    let (mut re, mut im) = (0.0, 0.0);
    for (u, wu) in us.iter().zip(&wu) {
        let (mut rr, mut ii) = (0.0, 0.0);
        for (v, wv) in vs.iter().zip(&wv) {
            let mut phase = 0.0;
            for c in 0..3 {
                phase += df[c] * (u * frame.xi[c] + v * frame.eta[c]);
            }
            let (s, co) = (2.0 * PI * phase).sin_cos();
            rr += wv * co;
            ii += wv * s;
        }
        re += wu * rr;
        im += wu * ii;
    }
    re * re + im * im
}

/// Contour length of `cos(2πu)` on the unit square.
pub const COS_LINES_LENGTH: f64 = 2.0;
/// Arc length of the quarter circle of radius ½.
pub const QUARTER_CIRCLE_LENGTH: f64 = PI / 4.0;
