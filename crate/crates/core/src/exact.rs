//! Exact sign predicates for integer points against floating point geometry.
//!
//! Every `f64` is a dyadic rational, so the predicates below are decided
//! exactly: a filtered floating point evaluation answers when it is safely
//! away from zero, otherwise the expression is recomputed over `BigRational`.

use std::cmp::Ordering;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};

const EPS: f64 = f64::EPSILON;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn rat_int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn exact_dot(p: &[i64; 3], alpha: &[f64; 3]) -> BigRational {
    (0..3).fold(BigRational::zero(), |acc, i| acc + rat_int(p[i]) * rat(alpha[i]))
}

/// Sign of `⟨p, α⟩ − c`.
pub fn dot_cmp(p: &[i64; 3], alpha: &[f64; 3], c: f64) -> Ordering {
    let terms = [p[0] as f64 * alpha[0], p[1] as f64 * alpha[1], p[2] as f64 * alpha[2]];
    let approx = terms[0] + terms[1] + terms[2] - c;
    let mag = terms.iter().map(|t| t.abs()).sum::<f64>() + c.abs();
    if approx.abs() > 8.0 * EPS * mag {
        return approx.partial_cmp(&0.0).unwrap();
    }
    (exact_dot(p, alpha) - rat(c)).cmp(&BigRational::zero())
}

/// Whether `c₁ ≤ ⟨p, α⟩ ≤ c₂`.
pub fn dot_in_interval(p: &[i64; 3], alpha: &[f64; 3], lo: f64, hi: f64) -> bool {
    dot_cmp(p, alpha, lo) != Ordering::Less && dot_cmp(p, alpha, hi) != Ordering::Greater
}

/// Whether `2√m · ⟨p, α⟩ ≥ 2m − s²`, the closed-cap condition
/// `‖p − √m α‖ ≤ s` for `‖p‖² = m` and `‖α‖ = 1`.
pub fn in_cap(p: &[i64; 3], alpha: &[f64; 3], m: u64, s: f64) -> bool {
    let x = p[0] as f64 * alpha[0] + p[1] as f64 * alpha[1] + p[2] as f64 * alpha[2];
    let xmag: f64 = (0..3).map(|i| (p[i] as f64 * alpha[i]).abs()).sum();
    let root = (m as f64).sqrt();
    let lhs = 2.0 * root * x;
    let rhs = 2.0 * m as f64 - s * s;
    let err = 16.0 * EPS * (2.0 * root * xmag + 2.0 * m as f64 + s * s);
    if (lhs - rhs).abs() > err {
        return lhs > rhs;
    }
    let x = exact_dot(p, alpha);
    let t = rat_int(2 * m as i64) - rat(s) * rat(s);
    match (x.is_negative(), t.is_positive()) {
        (false, false) => true,
        (true, true) => false,
        // both sides non-negative: compare squares
        (false, true) => rat_int(4 * m as i64) * &x * &x >= &t * &t,
        // both sides negative: squaring flips the inequality
        (true, false) => rat_int(4 * m as i64) * &x * &x <= &t * &t,
    }
}

/// Exact `|⟨d, α⟩| ≤ ρ‖d‖`, i.e. `⟨d, α⟩² ≤ ρ²‖d‖²`.
pub fn in_cone(d: &[i64; 3], alpha: &[f64; 3], rho: f64) -> bool {
    let x = d[0] as f64 * alpha[0] + d[1] as f64 * alpha[1] + d[2] as f64 * alpha[2];
    let xmag: f64 = (0..3).map(|i| (d[i] as f64 * alpha[i]).abs()).sum();
    let n2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64;
    let lhs = x * x;
    let rhs = rho * rho * n2;
    let err = 16.0 * EPS * (xmag * xmag + rhs);
    if (lhs - rhs).abs() > err {
        return lhs < rhs;
    }
    let x = exact_dot(d, alpha);
    let r = rat(rho);
    &x * &x <= &r * &r * rat_int(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
}

/// Whether the integer `n` satisfies `n ≤ s²`.
pub fn int_le_sq(n: i64, s: f64) -> bool {
    let s2 = s * s;
    let nf = n as f64;
    if (nf - s2).abs() > 4.0 * EPS * (nf.abs() + s2) {
        return nf < s2;
    }
    rat_int(n) <= rat(s) * rat(s)
}
