//! Fixed-order reductions.
//!
//! Every parallel loop in the crate produces one value per index and then
//! reduces the index-ordered buffer with [`pairwise_sum`]. The shape of the
//! summation tree depends only on the length of the buffer, so the result is
//! bit-identical for any rayon pool size.

use rayon::prelude::*;

const LEAF: usize = 8;

/// Pairwise (cascade) summation with a tree fixed by `values.len()`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluate `f` on `0..n` in parallel and reduce in index order.
pub fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = (0..n).into_par_iter().map(f).collect();
    pairwise_sum(&parts)
}

/// Integer counterpart of [`par_sum`]; integer addition is associative so
/// any reduction order gives the same answer.
pub fn par_count<F>(n: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    (0..n).into_par_iter().map(f).sum()
}
