//! Batch execution helpers.
//!
//! Per-sample work fans out across threads when the `parallel` feature is
//! enabled and runs on plain iterators otherwise. Reductions always happen
//! on the index-ordered results with a fixed pairwise tree, so means and
//! gradient sums are bitwise identical regardless of feature flags or
//! thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub(crate) fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps `f` over an index range, preserving order.
pub(crate) fn map_indices<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Pairwise (stride-doubling) sum. The reduction tree depends only on the
/// slice length.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    let mut buf = values.to_vec();
    let n = buf.len();
    let mut stride = 1;
    while stride < n {
        let mut i = 0;
        while i + stride < n {
            buf[i] += buf[i + stride];
            i += 2 * stride;
        }
        stride *= 2;
    }
    if n == 0 {
        0.0
    } else {
        buf[0]
    }
}

pub(crate) fn pairwise_mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Pairwise elementwise sum of equal-length vectors, consuming the input.
/// Uses the same stride-doubling tree as [`pairwise_sum`].
pub(crate) fn pairwise_sum_vecs(mut rows: Vec<Vec<f64>>) -> Vec<f64> {
    let n = rows.len();
    assert!(n > 0, "pairwise_sum_vecs on empty input");
    let mut stride = 1;
    while stride < n {
        let mut i = 0;
        while i + stride < n {
            let (head, tail) = rows.split_at_mut(i + stride);
            let dst = &mut head[i];
            let src = &tail[0];
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += *s;
            }
            i += 2 * stride;
        }
        stride *= 2;
    }
    rows.swap_remove(0)
}
