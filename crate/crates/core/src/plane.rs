//! Plane normals with exact surd components, their arithmetic type, the
//! orthonormal frame `(ξ, η)` of the plane and the projection matrix `Ω`.

use std::fmt;
use std::str::FromStr;

use num::integer::gcd;

use crate::error::{Error, Result};
use crate::vec3::{self, Mat3, Vec3};

/// Frame convention tag recorded next to every frame-dependent quantity.
pub const FRAME_CONVENTION: &str = "cyclic-shift-largest-first";

const UNIT_TOL: f64 = 1e-12;

/// An exact real `p/q · √d` with `q > 0`, `gcd(|p|, q) = 1` and `d` square-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormalComponent {
    p: i64,
    q: u64,
    d: u64,
}

impl NormalComponent {
    pub fn new(p: i64, q: u64, d: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("zero denominator in normal component"));
        }
        if d == 0 {
            return Ok(Self::zero());
        }
        // pull square factors of d out into p
        let mut p = p;
        let mut d = d;
        let mut k = 2u64;
        while k * k <= d {
            while d.is_multiple_of(k * k) {
                d /= k * k;
                p = p
                    .checked_mul(k as i64)
                    .ok_or_else(|| Error::invalid("normal component overflows i64"))?;
            }
            k += 1;
        }
        if p == 0 {
            return Ok(Self::zero());
        }
        let g = gcd(p.unsigned_abs(), q);
        Ok(Self { p: p / g as i64, q: q / g, d })
    }

    pub fn zero() -> Self {
        Self { p: 0, q: 1, d: 1 }
    }

    pub fn rational(p: i64, q: u64) -> Result<Self> {
        Self::new(p, q, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0
    }

    pub fn parts(&self) -> (i64, u64, u64) {
        (self.p, self.q, self.d)
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64 * (self.d as f64).sqrt()
    }
}

impl fmt::Display for NormalComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)?;
        if self.q != 1 {
            write!(f, "/{}", self.q)?;
        }
        if self.d != 1 {
            write!(f, "*sqrt({})", self.d)?;
        }
        Ok(())
    }
}

impl FromStr for NormalComponent {
    type Err = Error;

    /// Accepts `p`, `p/q`, `p*sqrt(d)`, `p/q*sqrt(d)` and `sqrt(d)`, each
    /// with an optional sign.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("malformed normal component `{s}`"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(&t)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let (coef, surd) = match body.find("sqrt(") {
            Some(pos) => {
                let coef = body[..pos].strip_suffix('*').unwrap_or(&body[..pos]);
                if pos > 0 && !body[..pos].ends_with('*') {
                    return Err(bad());
                }
                let inner = body[pos + 5..].strip_suffix(')').ok_or_else(bad)?;
                let d: u64 = inner.parse().map_err(|_| bad())?;
                (coef, d)
            }
            None => (body, 1),
        };
        let (p, q) = if coef.is_empty() {
            (1i64, 1u64)
        } else if let Some((num, den)) = coef.split_once('/') {
            (num.parse().map_err(|_| bad())?, den.parse().map_err(|_| bad())?)
        } else {
            (coef.parse().map_err(|_| bad())?, 1)
        };
        if p < 0 {
            return Err(bad());
        }
        Self::new(if neg { -p } else { p }, q, surd)
    }
}

/// Arithmetic type of a normal: how many of the ratios `n₂/n₁`, `n₃/n₁` are
/// irrational under the best relabeling of coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaneType {
    /// Both ratios rational.
    I,
    /// Exactly one ratio irrational.
    II,
    /// Both ratios irrational.
    III,
}

impl fmt::Display for PlaneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaneType::I => "i",
            PlaneType::II => "ii",
            PlaneType::III => "iii",
        })
    }
}

impl FromStr for PlaneType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(PlaneType::I),
            "ii" | "2" => Ok(PlaneType::II),
            "iii" | "3" => Ok(PlaneType::III),
            _ => Err(Error::invalid(format!("unknown plane type `{s}`"))),
        }
    }
}

/// Two components have a rational ratio iff they share the square-free part.
/// Zero components are rational multiples of anything, so the type is the
/// number of distinct square-free parts among the nonzero components.
pub fn classify_normal(normal: &[NormalComponent; 3]) -> Result<PlaneType> {
    let mut classes: Vec<u64> = normal.iter().filter(|c| !c.is_zero()).map(|c| c.d).collect();
    if classes.is_empty() {
        return Err(Error::invalid("normal vector is zero"));
    }
    classes.sort_unstable();
    classes.dedup();
    Ok(match classes.len() {
        1 => PlaneType::I,
        2 => PlaneType::II,
        _ => PlaneType::III,
    })
}

/// A normal given either exactly or as floating point. Only exact normals can
/// be classified.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalInput {
    Exact([NormalComponent; 3]),
    Float(Vec3),
}

impl NormalInput {
    pub fn unit(&self) -> Result<Vec3> {
        let raw = match self {
            NormalInput::Exact(c) => [c[0].value(), c[1].value(), c[2].value()],
            NormalInput::Float(v) => *v,
        };
        vec3::normalize(&raw).ok_or_else(|| Error::invalid("normal vector is zero"))
    }
}

impl fmt::Display for NormalInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalInput::Exact(c) => write!(f, "{},{},{}", c[0], c[1], c[2]),
            NormalInput::Float(v) => write!(f, "{:?},{:?},{:?}", v[0], v[1], v[2]),
        }
    }
}

impl FromStr for NormalInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("normal `{s}` must have three components")));
        }
        let is_float = |p: &str| !p.contains("sqrt") && (p.contains('.') || p.contains('e') || p.contains('E'));
        if parts.iter().any(|p| is_float(p)) {
            let mut v = [0.0f64; 3];
            for (slot, p) in v.iter_mut().zip(&parts) {
                *slot = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("malformed normal component `{p}`")))?;
            }
            if v.iter().all(|x| *x == 0.0) || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("normal vector is zero or not finite"));
            }
            return Ok(NormalInput::Float(v));
        }
        let c = [parts[0].parse()?, parts[1].parse()?, parts[2].parse()?];
        if c.iter().all(NormalComponent::is_zero) {
            return Err(Error::invalid("normal vector is zero"));
        }
        Ok(NormalInput::Exact(c))
    }
}

/// Parse a patch `AxB` with positive decimal sides.
pub fn parse_patch(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::invalid(format!("malformed patch `{s}`, expected AxB"));
    let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    Ok((a, b))
}

/// A planar patch `[0,A]×[0,B]` in the plane through `offset` with the given normal.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSpec {
    pub normal: NormalInput,
    pub declared_type: Option<PlaneType>,
    pub a: f64,
    pub b: f64,
    pub offset: Vec3,
}

impl PlaneSpec {
    pub fn new(normal: NormalInput, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::invalid("patch sides must be positive"));
        }
        normal.unit()?;
        Ok(Self { normal, declared_type: None, a, b, offset: [0.0; 3] })
    }

    pub fn parse(normal: &str, patch: &str) -> Result<Self> {
        let (a, b) = parse_patch(patch)?;
        Self::new(normal.parse()?, a, b)
    }

    pub fn with_declared_type(mut self, t: PlaneType) -> Self {
        self.declared_type = Some(t);
        self
    }

    pub fn with_offset(mut self, p: Vec3) -> Self {
        self.offset = p;
        self
    }

    pub fn unit_normal(&self) -> Result<Vec3> {
        self.normal.unit()
    }

    /// Declared type if present, otherwise the exact classification.
    pub fn plane_type(&self) -> Result<PlaneType> {
        if let Some(t) = self.declared_type {
            return Ok(t);
        }
        match &self.normal {
            NormalInput::Exact(c) => classify_normal(c),
            NormalInput::Float(_) => Err(Error::invalid(
                "a floating point normal cannot be classified; declare its type",
            )),
        }
    }
}

/// Orthonormal frame `{n, ξ, η}` of a plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub xi: Vec3,
    pub eta: Vec3,
    pub normal: Vec3,
    /// Cyclic shift `k`: the formula is applied to `(n_k, n_{k+1}, n_{k+2})`.
    pub shift: usize,
}

impl Frame {
    /// Builds the frame for a unit normal. The coordinates are cyclically
    /// shifted so the largest `|n_i|` (lowest index on ties) sits first, then
    /// `ξ = (n₂,−n₁,0)/√(n₁²+n₂²)`, `η = (n₁n₃, n₂n₃, −n₁²−n₂²)/√(n₁²+n₂²)`,
    /// and the axes are shifted back.
    pub fn from_normal(normal: Vec3) -> Result<Self> {
        let n = vec3::normalize(&normal).ok_or_else(|| Error::invalid("normal vector is zero"))?;
        let mut shift = 0;
        for k in 1..3 {
            if n[k].abs() > n[shift].abs() {
                shift = k;
            }
        }
        let s = [n[shift], n[(shift + 1) % 3], n[(shift + 2) % 3]];
        let rho = (s[0] * s[0] + s[1] * s[1]).sqrt();
        let xi_s = [s[1] / rho, -s[0] / rho, 0.0];
        let eta_s = [s[0] * s[2] / rho, s[1] * s[2] / rho, -rho];
        let unshift = |v: Vec3| {
            let mut out = [0.0; 3];
            for i in 0..3 {
                out[(i + shift) % 3] = v[i];
            }
            out
        };
        Ok(Self { xi: unshift(xi_s), eta: unshift(eta_s), normal: n, shift })
    }

    /// Point `P + uξ + vη`.
    pub fn point(&self, offset: &Vec3, u: f64, v: f64) -> Vec3 {
        [
            offset[0] + u * self.xi[0] + v * self.eta[0],
            offset[1] + u * self.xi[1] + v * self.eta[1],
            offset[2] + u * self.xi[2] + v * self.eta[2],
        ]
    }

    /// Same plane with the roles of `ξ` and `η` exchanged.
    pub fn swapped(&self) -> Self {
        Self { xi: self.eta, eta: self.xi, normal: vec3::scale(&self.normal, -1.0), shift: self.shift }
    }
}

pub fn build_frame(spec: &PlaneSpec) -> Result<Frame> {
    Frame::from_normal(spec.unit_normal()?)
}

/// Orthogonal projection `Ω = I − n nᵀ` onto the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMatrix {
    pub omega: Mat3,
}

pub fn projection_matrix(n: &Vec3) -> Result<ProjectionMatrix> {
    if (vec3::norm(n) - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid(format!("normal {n:?} is not a unit vector")));
    }
    let mut omega = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            omega[i][j] = if i == j { 1.0 - n[i] * n[i] } else { -n[i] * n[j] };
        }
    }
    Ok(ProjectionMatrix { omega })
}
