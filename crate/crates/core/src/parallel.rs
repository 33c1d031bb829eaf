//! Replicate fan-out with a fixed reduction order.
//!
//! Replicates are cut into fixed chunks of [`CHUNK`]; each chunk is folded
//! sequentially into a fresh accumulator and the chunk results are merged
//! left to right. The merge tree depends only on the replicate count, so
//! reports are bit-identical for any thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RandomSource;

pub const CHUNK: u64 = 4096;

/// Associative combination of partial results.
pub trait Merge {
    fn merge(&mut self, other: Self);
}

impl<T: Merge> Merge for Vec<T> {
    fn merge(&mut self, other: Self) {
        assert_eq!(
            self.len(),
            other.len(),
            "merging accumulators of different shape"
        );
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

impl Merge for u64 {
    fn merge(&mut self, other: Self) {
        *self += other;
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge(&mut self, other: Self) {
        self.0.merge(other.0);
        self.1.merge(other.1);
    }
}

impl<A: Merge, B: Merge, C: Merge> Merge for (A, B, C) {
    fn merge(&mut self, other: Self) {
        self.0.merge(other.0);
        self.1.merge(other.1);
        self.2.merge(other.2);
    }
}

/// Keeps every item, in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct Collected<T>(pub Vec<T>);

impl<T> Default for Collected<T> {
    fn default() -> Self {
        Self(Vec::new())
    }
}

impl<T> Merge for Collected<T> {
    fn merge(&mut self, mut other: Self) {
        self.0.append(&mut other.0);
    }
}

/// Seed of replicate `r` under `master_seed`.
pub fn replicate_seed(master_seed: u64, r: u64) -> u64 {
    RandomSource::new(master_seed, "replicate", 0).word(r)
}

/// Folds replicates `0..count` with `step` and merges the partial results.
pub fn map_reduce<A, I, F>(count: u64, threads: usize, init: I, step: F) -> Result<A>
where
    A: Merge + Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let run_chunk = |c: u64| -> Result<A> {
        let mut acc = init();
        for r in c * CHUNK..((c + 1) * CHUNK).min(count) {
            step(&mut acc, r)?;
        }
        Ok(acc)
    };
    let parts: Vec<Result<A>> = if threads <= 1 {
        (0..chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    };
    let mut total = init();
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_result() {
        let f = |acc: &mut Vec<u64>, r: u64| {
            acc[(r % 3) as usize] += r;
            Ok(())
        };
        let one = map_reduce(10_000, 1, || vec![0u64; 3], f).unwrap();
        let four = map_reduce(10_000, 4, || vec![0u64; 3], f).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.iter().sum::<u64>(), 10_000 * 9_999 / 2);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<u64> = map_reduce(
            100,
            1,
            || 0,
            |_, r| {
                if r == 50 {
                    Err(Error::StabilizationCap(1))
                } else {
                    Ok(())
                }
            },
        );
        assert_eq!(r, Err(Error::StabilizationCap(1)));
    }
}
