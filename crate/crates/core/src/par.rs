//! Chunked data-parallel evaluation with a sequential fallback.
//!
//! Work is split into a fixed number of chunks whose results come back in
//! chunk order, so a reduction over them gives the same answer whether the
//! chunks ran on one thread or many. Random streams are keyed by chunk index
//! for the same reason.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How to run chunked loops. `Parallel` falls back to sequential when the
/// crate is built without the `parallel` feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Self::Parallel
    }
}

/// Evaluates `f(0), …, f(n − 1)` and returns them in index order.
pub fn map_indexed<R, F>(n: usize, exec: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Splits `0..total` into `chunks` contiguous ranges of near-equal size.
pub fn chunk_ranges(total: usize, chunks: usize) -> Vec<std::ops::Range<usize>> {
    let chunks = chunks.max(1);
    let base = total / chunks;
    let extra = total % chunks;
    let mut start = 0;
    (0..chunks)
        .map(|c| {
            let len = base + usize::from(c < extra);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

/// Deterministic RNG for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Default chunk count for sampling runs; fixed so results do not depend on
/// the machine.
pub const SAMPLING_CHUNKS: usize = 64;

/// Max of `f` over `items`, skipping nothing; `0.0` for empty input.
pub fn max_over<T, F>(items: &[T], exec: Execution, f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    map_indexed(items.len(), exec, |i| f(&items[i]))
        .into_iter()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn ranges_cover_everything() {
        let ranges = chunk_ranges(10, 3);
        assert_eq!(ranges, vec![0..4, 4..7, 7..10]);
        assert_eq!(chunk_ranges(2, 4).iter().map(|r| r.len()).sum::<usize>(), 2);
        assert_eq!(chunk_ranges(5, 0), vec![0..5]);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let work = |c: usize| {
            let mut rng = chunk_rng(7, c);
            (0..100).map(|_| rng.random::<f64>()).sum::<f64>()
        };
        let seq = map_indexed(16, Execution::Sequential, work);
        let par = map_indexed(16, Execution::Parallel, work);
        assert_eq!(seq, par);
    }

    #[test]
    fn streams_differ_between_chunks() {
        let a: u64 = chunk_rng(1, 0).random();
        let b: u64 = chunk_rng(1, 1).random();
        assert_ne!(a, b);
    }
}
