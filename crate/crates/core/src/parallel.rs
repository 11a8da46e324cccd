//! Trial fan-out. Trials are keyed by index, so results do not depend on
//! the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable selecting the worker thread count.
pub const THREADS_ENV: &str = "PERCTRUNC_THREADS";

/// Evaluates `f` on every trial index, in index order.
pub fn map_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Counts trial indices for which `f` holds.
pub fn count_trials<F>(trials: u64, f: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    (0..trials).into_par_iter().filter(|&t| f(t)).count() as u64
}

/// Thread count from `PERCTRUNC_THREADS`; `None` means rayon's default.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|n| (n > 0).then_some(n))
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// Runs `f` inside a pool with the given thread count.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
