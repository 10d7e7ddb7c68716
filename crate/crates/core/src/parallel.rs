//! Block-parallel execution with deterministic, worker-independent results.
//!
//! Work of `total` items is cut into blocks of [`BLOCK_SIZE`]. Block `b`
//! always covers the same items and (for Monte Carlo) owns RNG stream `b`,
//! and block results come back in block order. With the `parallel` feature
//! blocks run on the current rayon pool; without it they run in sequence.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const BLOCK_SIZE: usize = 8192;

pub(crate) fn block_ranges(total: usize) -> Vec<Range<usize>> {
    (0..total.div_ceil(BLOCK_SIZE))
        .map(|b| b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(total))
        .collect()
}

/// Evaluate `f(block_index, item_range)` for every block, returning results in
/// block order.
pub fn map_blocks<T, F>(total: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync + Send,
{
    let ranges = block_ranges(total);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ranges
            .into_par_iter()
            .enumerate()
            .map(|(b, r)| f(b, r))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ranges.into_iter().enumerate().map(|(b, r)| f(b, r)).collect()
    }
}

/// Substream RNG for one block of draws.
pub fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Run `f` with at most `workers` threads. Without the `parallel` feature the
/// worker count is ignored.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
