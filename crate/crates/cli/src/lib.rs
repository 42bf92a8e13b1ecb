//! Commands behind the `gwflow` binary.

pub mod bench;
pub mod mesh_cmd;
pub mod run;
pub mod validate;

use anyhow::Context;

/// Thread count from the hardware, used when neither flag nor environment
/// variable gives one.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .with_context(|| format!("cannot start a pool of {threads} threads"))?;
    Ok(pool.install(f))
}
