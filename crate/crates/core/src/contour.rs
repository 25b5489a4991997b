//! Zero-level contour length of a sampled field by marching squares.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

/// Field values on a rectangular grid covering `[0, A] × [0, B]` with both
/// boundaries included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    /// Row-major, `values[i * nv + j] = f(u_i, v_j)`.
    pub values: Vec<f64>,
    /// Optional cell-center samples, `centers[i * (nv - 1) + j]`, used to
    /// resolve saddle cells.
    pub centers: Option<Vec<f64>>,
    pub nu: usize,
    pub nv: usize,
    pub hu: f64,
    pub hv: f64,
}

impl GridField {
    /// Sample `f` on the grid of `nu × nv` nodes over `[0, a] × [0, b]`,
    /// including cell centers.
    pub fn from_fn<F>(a: f64, b: f64, nu: usize, nv: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        if nu < 2 || nv < 2 {
            return Err(Error::invalid("grid needs at least 2 nodes per side"));
        }
        let hu = a / (nu - 1) as f64;
        let hv = b / (nv - 1) as f64;
        let values = (0..nu * nv).into_par_iter().map(|k| f((k / nv) as f64 * hu, (k % nv) as f64 * hv)).collect();
        let nc = nv - 1;
        let centers = (0..(nu - 1) * nc)
            .into_par_iter()
            .map(|k| f(((k / nc) as f64 + 0.5) * hu, ((k % nc) as f64 + 0.5) * hv))
            .collect();
        Ok(Self { values, centers: Some(centers), nu, nv, hu, hv })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nv + j]
    }

    fn center(&self, i: usize, j: usize) -> f64 {
        match &self.centers {
            Some(c) => c[i * (self.nv - 1) + j],
            None => 0.25 * (self.at(i, j) + self.at(i + 1, j) + self.at(i, j + 1) + self.at(i + 1, j + 1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalLength {
    pub length: f64,
    /// Grid nodes holding an exact zero, counted as positive.
    pub zero_nodes: usize,
}

fn positive(v: f64) -> bool {
    v >= 0.0
}

/// Zero crossing on the edge from `p` (value `a`) to `q` (value `b`).
fn crossing(p: (f64, f64), q: (f64, f64), a: f64, b: f64) -> (f64, f64) {
    let t = a / (a - b);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

fn dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).hypot(p.1 - q.1)
}

fn cell_length(field: &GridField, i: usize, j: usize) -> f64 {
    let (hu, hv) = (field.hu, field.hv);
    let v00 = field.at(i, j);
    let v10 = field.at(i + 1, j);
    let v11 = field.at(i + 1, j + 1);
    let v01 = field.at(i, j + 1);
    let s = [positive(v00), positive(v10), positive(v11), positive(v01)];
    if s.iter().all(|&x| x == s[0]) {
        return 0.0;
    }
    // local corners counter-clockwise, in cell units scaled by the steps
    let c = [(0.0, 0.0), (hu, 0.0), (hu, hv), (0.0, hv)];
    let v = [v00, v10, v11, v01];
    // edge k joins corner k and corner k+1
    let mut pts: [Option<(f64, f64)>; 4] = [None; 4];
    for k in 0..4 {
        let l = (k + 1) % 4;
        if s[k] != s[l] {
            pts[k] = Some(crossing(c[k], c[l], v[k], v[l]));
        }
    }
    let found: Vec<(usize, (f64, f64))> = pts.iter().enumerate().filter_map(|(k, p)| p.map(|p| (k, p))).collect();
    match found.len() {
        2 => dist(found[0].1, found[1].1),
        4 => {
            let e = |k: usize| pts[k].unwrap();
            if positive(field.center(i, j)) == s[0] {
                // corners 0 and 2 joined through the center: cut off 1 and 3
                dist(e(0), e(1)) + dist(e(2), e(3))
            } else {
                dist(e(3), e(0)) + dist(e(1), e(2))
            }
        }
        _ => unreachable!("a sign pattern has an even number of changes"),
    }
}

/// Length of the polyline approximating `{f = 0}`.
pub fn nodal_length(field: &GridField) -> NodalLength {
    let nc = field.nv - 1;
    let rows: Vec<f64> = (0..field.nu - 1)
        .into_par_iter()
        .map(|i| {
            let row: Vec<f64> = (0..nc).map(|j| cell_length(field, i, j)).collect();
            pairwise_sum(&row)
        })
        .collect();
    let zero_nodes = field.values.iter().filter(|v| **v == 0.0).count();
    NodalLength { length: pairwise_sum(&rows), zero_nodes }
}
