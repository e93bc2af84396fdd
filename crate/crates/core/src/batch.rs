//! Execution of independent simulation jobs.
//!
//! Delay-insensitivity trials, benchmark sweeps and random-sample
//! cross-checks are embarrassingly parallel: every job owns its netlist
//! and its RNG stream, so results are a pure function of the job index.
//! With the `parallel` feature (default) jobs can run on the rayon pool;
//! results are collected in index order either way, so the output is
//! identical for both modes.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Run on the rayon thread pool. Without the `parallel` feature this
    /// degrades to sequential execution (same results, one thread).
    Parallel,
}

impl ExecMode {
    /// Preferred mode for this build.
    pub fn default_mode() -> ExecMode {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }

    /// True if `Parallel` actually uses a thread pool in this build.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Map `f` over `0..n`, returning results in index order.
pub fn run_indexed<T, F>(n: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// Map `f` over a slice, returning results in input order.
pub fn map_jobs<T, U, F>(items: &[T], mode: ExecMode, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    run_indexed(items.len(), mode, |i| f(&items[i]))
}
