//! Bounded data-parallel map with a sequential fallback.
//!
//! Work items are identified by index and results are always returned in
//! index order, so the output is byte-identical whatever the job count.
//! With the `parallel` feature disabled the crate has no rayon dependency
//! and everything runs sequentially.

/// Job count: 0 = all cores, 1 = sequential, n = a pool of n threads.
pub type Jobs = usize;

#[cfg(feature = "parallel")]
pub fn map_indexed<R, F>(n: usize, jobs: Jobs, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match jobs {
        1 => (0..n).map(f).collect(),
        0 => (0..n).into_par_iter().map(f).collect(),
        bound => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(bound)
                .build()
                .expect("failed to build worker pool");
            pool.install(|| (0..n).into_par_iter().map(f).collect())
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<R, F>(n: usize, _jobs: Jobs, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}
