use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use shape_core::Executor;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "SHAPE_WORKERS";

/// Runs jobs on scoped threads pulling from a shared counter. Output order is
/// job order, whatever the completion order.
#[derive(Debug, Clone, Copy)]
pub struct ThreadExecutor {
    workers: NonZeroUsize,
}

impl ThreadExecutor {
    pub fn new(workers: NonZeroUsize) -> Self {
        Self { workers }
    }

    /// Reads `SHAPE_WORKERS`, falling back to the available parallelism.
    pub fn from_env() -> Result<Self, String> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<NonZeroUsize>()
                .map(Self::new)
                .map_err(|_| format!("{WORKERS_ENV} must be a positive integer, got {v:?}")),
            Err(_) => Ok(Self::new(thread::available_parallelism().unwrap_or(NonZeroUsize::MIN))),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.get()
    }
}

impl Executor for ThreadExecutor {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let workers = self.workers.get().min(count);
        if workers <= 1 {
            return (0..count).map(job).collect();
        }
        let next = AtomicUsize::new(0);
        let mut done: Vec<(usize, T)> = thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    scope.spawn(|| {
                        let mut out = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= count {
                                break out;
                            }
                            out.push((i, job(i)));
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
                .collect()
        });
        done.sort_unstable_by_key(|(i, _)| *i);
        done.into_iter().map(|(_, t)| t).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_job_order() {
        let ex = ThreadExecutor::new(NonZeroUsize::new(4).unwrap());
        let out = ex.map(100, |i| {
            std::thread::sleep(std::time::Duration::from_micros(((100 - i) * 7) as u64));
            i * i
        });
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn zero_jobs() {
        let ex = ThreadExecutor::new(NonZeroUsize::new(3).unwrap());
        assert!(ex.map(0, |i| i).is_empty());
    }
}
