//! Trial execution: sequential, or data-parallel over rayon when the
//! `parallel` feature is enabled.
//!
//! `map` always returns results in trial order, so any reduction done by the
//! caller over the returned vector is independent of scheduling.

/// How independent trials are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Executor {
    #[default]
    Sequential,
    /// `workers == 0` lets rayon pick the thread count.
    Parallel { workers: usize },
}

impl Executor {
    /// `1` worker means sequential execution.
    pub fn with_workers(workers: usize) -> Self {
        if workers == 1 {
            Executor::Sequential
        } else {
            Executor::Parallel { workers }
        }
    }

    /// Whether this build can actually run trials in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    pub fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match *self {
            Executor::Sequential => (0..count).map(f).collect(),
            Executor::Parallel { workers } => parallel_map(workers, count, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(workers: usize, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;

    let run = || (0..count).into_par_iter().map(&f).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        // fall back to the global pool
        Err(_) => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(_workers: usize, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}
