//! Parallel/sequential execution of independent work items.
//!
//! Sweep cells and sphere-grid chunks are embarrassingly parallel. With the
//! `parallel` feature (default) they run on rayon; without it, or when a
//! caller asks for sequential execution, they run on the current thread.
//! Results always come back in input order, so output is byte-identical
//! across modes and thread counts.

/// How to run a batch of independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Rayon data-parallel execution (feature `parallel`).
    #[default]
    Parallel,
    /// Plain sequential loop on the calling thread.
    Sequential,
}

/// Apply `f` to `0..count`, returning results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..count).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..count).map(f).collect()
            }
        }
    }
}

/// Run `body` on a rayon pool with `threads` workers (0 = rayon default).
/// Without the `parallel` feature the body just runs on this thread.
pub fn with_thread_pool<R: Send>(threads: usize, body: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            body()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("failed to build thread pool")
                .install(body)
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        body()
    }
}
