//! Data-parallel helpers with a sequential fallback.
//!
//! Independent sub-runs (multi-start minimizations, test-function families,
//! random sample batches) go through [`map`]. With the `parallel` feature the
//! [`Exec::Parallel`] mode runs on the rayon pool; without it, every mode is
//! sequential. Results always come back in input order, so output does not
//! depend on scheduling.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Sum of `f(i)` over `0..n`, reduced in a fixed chunk order so that the
/// floating-point result is identical in both modes.
pub fn sum_range<F>(exec: Exec, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const CHUNK: usize = 256;
    let chunks = n.div_ceil(CHUNK);
    let partial = map_range(exec, chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partial.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let a = sum_range(Exec::Sequential, 10_000, f);
        let b = sum_range(Exec::Parallel, 10_000, f);
        assert_eq!(a.to_bits(), b.to_bits());
        let xs: Vec<usize> = (0..100).collect();
        assert_eq!(map(Exec::Parallel, &xs, |x| x * 2), map(Exec::Sequential, &xs, |x| x * 2));
    }
}
