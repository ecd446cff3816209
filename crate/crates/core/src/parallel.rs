//! Opt-in data parallelism for independent grid points and search shells.
//!
//! The thread cap is process-wide. Zero (the default) keeps everything on the
//! calling thread. Every parallel map preserves input order, so reductions
//! downstream see the same sequence as the serial path.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use rayon::prelude::*;

static THREADS: AtomicUsize = AtomicUsize::new(0);
static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();

/// Set the thread cap. Only the first nonzero value builds a pool.
pub fn set_threads(n: usize) {
    THREADS.store(n, Ordering::SeqCst);
}

pub fn threads() -> usize {
    THREADS.load(Ordering::SeqCst)
}

fn pool() -> Option<&'static rayon::ThreadPool> {
    let n = threads();
    if n == 0 {
        return None;
    }
    POOL.get_or_init(|| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok())
        .as_ref()
}

/// Order-preserving map, parallel when a thread cap is set.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match pool() {
        Some(p) => p.install(|| items.par_iter().map(&f).collect()),
        None => items.iter().map(f).collect(),
    }
}
