//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers run on the rayon
//! global pool; without it they degrade to plain iteration. All helpers
//! preserve input order and use fixed chunking for floating-point
//! reductions, so results are bit-identical for any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size for deterministic parallel reductions.
const REDUCE_CHUNK: usize = 1024;

/// Order-preserving parallel map over a slice.
pub fn map_slice<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Order-preserving parallel map over an index range.
pub fn map_range<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sums `f(i)` over `0..n` with fixed chunk boundaries: per-chunk partial
/// sums may be computed on any thread, but are combined in chunk order.
pub fn sum_range(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    let chunks: Vec<(usize, usize)> = (0..n)
        .step_by(REDUCE_CHUNK)
        .map(|s| (s, (s + REDUCE_CHUNK).min(n)))
        .collect();
    let partials = map_slice(&chunks, |&(s, e)| (s..e).map(&f).sum::<f64>());
    partials.into_iter().sum()
}

/// Accumulates `f(i)` vectors over `0..n` into a single vector, with the
/// same fixed-chunk determinism guarantee as [`sum_range`].
pub fn sum_vectors(n: usize, width: usize, f: impl Fn(usize, &mut [f64]) + Sync + Send) -> Vec<f64> {
    let chunks: Vec<(usize, usize)> = (0..n)
        .step_by(REDUCE_CHUNK)
        .map(|s| (s, (s + REDUCE_CHUNK).min(n)))
        .collect();
    let partials = map_slice(&chunks, |&(s, e)| {
        let mut acc = vec![0.0; width];
        for i in s..e {
            f(i, &mut acc);
        }
        acc
    });
    let mut total = vec![0.0; width];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}
