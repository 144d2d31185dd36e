//! Deterministic sharded reductions over an index range.
//!
//! Results are merged with exact integer addition or an explicit
//! lowest-index rule, so the worker count never changes an answer.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `Σ f(i)` over `range`.
pub fn sum_u64<F>(range: Range<u64>, f: F) -> u64
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(f).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).sum()
    }
}

/// Element-wise sum of per-index histograms of length `width`.
pub fn histogram<F>(range: Range<u64>, width: usize, f: F) -> Vec<u64>
where
    F: Fn(u64, &mut Vec<u64>) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range
            .into_par_iter()
            .fold(
                || vec![0u64; width],
                |mut acc, i| {
                    f(i, &mut acc);
                    acc
                },
            )
            .reduce(
                || vec![0u64; width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut acc = vec![0u64; width];
        for i in range {
            f(i, &mut acc);
        }
        acc
    }
}

/// The smallest `i` in `range` for which `f` yields a value, with that value.
pub fn first_hit<T, F>(range: Range<u64>, f: F) -> Option<(u64, T)>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range
            .into_par_iter()
            .filter_map(|i| f(i).map(|t| (i, t)))
            .min_by_key(|(i, _)| *i)
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.filter_map(|i| f(i).map(|t| (i, t))).next()
    }
}

/// `f(i)` for every index, collected in index order.
pub fn map_collect<T, F>(range: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}

/// Runs `op` on a pool with exactly `workers` threads (`0` = default pool).
pub fn with_workers<R, F>(workers: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            return op();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        op()
    }
}
