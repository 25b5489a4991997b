//! Integer points on the sphere `x² + y² + z² = m`.

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use crate::error::{Error, Result};

/// Default ceiling on `m`. Consumers run pair and triple loops over the
/// frequency set, so very large `m` is refused instead of truncated.
pub const DEFAULT_M_CEILING: u64 = 1_000_000;

/// One lattice point `λ` on the sphere of radius `√m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(pub [i64; 3]);

impl Frequency {
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn neg(&self) -> Frequency {
        Frequency([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }

    pub fn sub(&self, other: &Frequency) -> [i64; 3] {
        [self.0[0] - other.0[0], self.0[1] - other.0[1], self.0[2] - other.0[2]]
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// The full frequency set `Λ_m`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencySet {
    m: u64,
    points: Vec<Frequency>,
}

impl FrequencySet {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn points(&self) -> &[Frequency] {
        &self.points
    }

    /// `N = |Λ_m|`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radius(&self) -> f64 {
        (self.m as f64).sqrt()
    }

    pub fn contains(&self, p: &Frequency) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// Points as floating point vectors, in set order.
    pub fn as_f64(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(Frequency::as_f64).collect()
    }

    /// CSV with header `x,y,z`, one point per row in lexicographic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.0[0], p.0[1], p.0[2]);
        }
        out
    }
}

/// Integer square root, `⌊√n⌋`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let n = n as u128;
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x as u64
}

/// `m ≢ 0, 4, 7 (mod 8)`.
pub fn is_admissible(m: u64) -> bool {
    !matches!(m % 8, 0 | 4 | 7)
}

/// Sorted triples `0 ≤ a ≤ b ≤ c` with `a² + b² + c² = m`.
fn sorted_triples(m: u64) -> impl Iterator<Item = [u64; 3]> {
    let top = isqrt(m);
    (0..=top).flat_map(move |a| {
        let rest_a = m.saturating_sub(a * a);
        let b_top = if a * a > m { 0 } else { isqrt(rest_a) };
        (a..=b_top).filter_map(move |b| {
            if a * a + b * b > m {
                return None;
            }
            let rem = m - a * a - b * b;
            let c = isqrt(rem);
            (c * c == rem && c >= b).then_some([a, b, c])
        })
    })
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn enumerate_frequencies(m: u64) -> Result<FrequencySet> {
    enumerate_frequencies_with_ceiling(m, DEFAULT_M_CEILING)
}

pub fn enumerate_frequencies_with_ceiling(m: u64, ceiling: u64) -> Result<FrequencySet> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if m > ceiling {
        return Err(Error::Resource(format!("m = {m} exceeds the configured ceiling {ceiling}")));
    }
    let mut set = BTreeSet::new();
    for t in sorted_triples(m) {
        for perm in PERMUTATIONS {
            for signs in 0..8u8 {
                let mut p = [0i64; 3];
                for (k, &idx) in perm.iter().enumerate() {
                    let v = t[idx] as i64;
                    p[k] = if signs & (1 << k) != 0 { -v } else { v };
                }
                set.insert(Frequency(p));
            }
        }
    }
    Ok(FrequencySet { m, points: set.into_iter().collect() })
}

/// `r₃(m)` by a counting loop over sorted triples.
pub fn representation_count(m: u64) -> u64 {
    if m == 0 {
        return 1;
    }
    sorted_triples(m)
        .map(|[a, b, c]| {
            let perms = if a == b && b == c {
                1
            } else if a == b || b == c {
                3
            } else {
                6
            };
            let nonzero = [a, b, c].iter().filter(|&&v| v != 0).count() as u32;
            perms * 2u64.pow(nonzero)
        })
        .sum()
}

/// Splits the set into `N/2` pairs `(λ, −λ)` with `λ` the lexicographically
/// larger element; pairs are listed by decreasing representative.
pub fn antipodal_pairs(set: &FrequencySet) -> Vec<(Frequency, Frequency)> {
    set.points
        .iter()
        .rev()
        .filter(|p| **p > p.neg())
        .map(|p| (*p, p.neg()))
        .collect()
}
