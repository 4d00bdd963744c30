//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel map in the crate goes through [`map_range`]. Each output
//! element is computed by one closure call with its own fixed summation
//! order, so results are bit-identical for any thread count and for the
//! sequential path.

/// Selects how independent per-mode / per-node work is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// Uses the rayon pool when the `parallel` feature is enabled,
    /// otherwise falls back to [`Execution::Serial`].
    #[default]
    Parallel,
}

/// Evaluates `f(0), .., f(n-1)` and collects them in index order.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Runs `f` inside a pool with `threads` workers (0 = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
