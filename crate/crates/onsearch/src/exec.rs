//! Trial-level parallelism.
//!
//! Experiment suites express their work as an indexed map so the harness can
//! run trials in parallel. With the `parallel` feature (default) the map runs
//! on rayon; without it everything is sequential. Determinism comes from
//! seeding, not scheduling: trial `i` derives its RNG from `seed + i`, so the
//! two paths produce identical results.

/// Applies `f` to `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Applies `f` to `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential reference implementation of [`map_indexed`], always available
/// (the benchmark suite compares the two).
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Runs `body` under a bounded thread pool. `None` means the default pool;
/// without the `parallel` feature the bound is irrelevant and `body` just
/// runs.
#[cfg(feature = "parallel")]
pub fn with_thread_limit<R: Send>(threads: Option<usize>, body: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool construction only fails on invalid global state")
            .install(body),
        _ => body(),
    }
}

/// Runs `body` under a bounded thread pool. `None` means the default pool;
/// without the `parallel` feature the bound is irrelevant and `body` just
/// runs.
#[cfg(not(feature = "parallel"))]
pub fn with_thread_limit<R: Send>(threads: Option<usize>, body: impl FnOnce() -> R + Send) -> R {
    let _ = threads;
    body()
}
