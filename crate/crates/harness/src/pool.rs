//! A small worker pool for independent trials.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;

/// Runs `trial(i)` for `i` in `start..start + count` on up to `workers`
/// threads and returns the results in index order. Trials share nothing but
/// `trial` itself, so the output does not depend on `workers`. On failure
/// the error of the lowest failing index is returned.
pub fn run_trials<T, E>(
    start: u64,
    count: u64,
    workers: usize,
    trial: impl Fn(u64) -> Result<T, E> + Sync,
) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
{
    let workers = workers.clamp(1, count.max(1) as usize);
    if workers == 1 {
        return (start..start + count).map(&trial).collect();
    }
    let next = AtomicU64::new(start);
    let results = Mutex::new(Vec::with_capacity(count as usize));
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= start + count {
                    break;
                }
                let r = trial(i);
                results.lock().expect("no worker panicked").push((i, r));
            });
        }
    });
    let mut results = results.into_inner().expect("no worker panicked");
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

pub fn default_workers() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}
