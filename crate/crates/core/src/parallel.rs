//! Sample-level fan-out. Results are gathered in index order, so any
//! reduction done afterwards is independent of the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `workers` threads (0 means rayon's
/// default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub(crate) fn try_collect<T: Send>(
    count: u64,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    (0..count).into_par_iter().map(f).collect()
}
