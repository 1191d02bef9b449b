//! Job execution strategy for independent coalition and permutation jobs.

use alloc::vec::Vec;

/// Runs `count` independent jobs and returns their results in job order.
///
/// Implementations may run jobs concurrently; callers only rely on the output
/// being indexed by job number, so results never depend on completion order.
pub trait Executor {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..count).map(job).collect()
    }
}
