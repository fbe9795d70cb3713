//! Data-parallel execution of independent per-block tasks.
//!
//! Every task computes its own output with sequential code, so results do not
//! depend on the worker count or on the order tasks are scheduled in.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// Environment variable overriding the default worker count.
pub const THREADS_ENV: &str = "STAIRCASE_THREADS";

#[derive(Debug)]
enum Schedule {
    Pool(ThreadPool),
    Serial,
    /// Serial in reverse task order; used to check order independence.
    SerialReversed,
}

#[derive(Debug)]
pub struct Executor {
    workers: usize,
    schedule: Schedule,
}

impl Executor {
    /// A pool of `workers` threads; `workers == 1` runs inline.
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        if workers == 1 {
            return Ok(Executor::serial());
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("staircase-worker-{i}"))
            .build()
            .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
        Ok(Executor {
            workers,
            schedule: Schedule::Pool(pool),
        })
    }

    pub fn serial() -> Self {
        Executor {
            workers: 1,
            schedule: Schedule::Serial,
        }
    }

    pub fn serial_reversed() -> Self {
        Executor {
            workers: 1,
            schedule: Schedule::SerialReversed,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `f` once per item, each with exclusive access to its item.
    pub fn for_each<T, F>(&self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Send + Sync,
    {
        match &self.schedule {
            Schedule::Pool(pool) => pool.install(|| items.par_iter_mut().with_max_len(1).for_each(&f)),
            Schedule::Serial => items.iter_mut().for_each(f),
            Schedule::SerialReversed => items.iter_mut().rev().for_each(f),
        }
    }
}

/// A thread pool for running independent whole tasks (e.g. experiment trials).
#[derive(Debug)]
pub struct TrialPool(ThreadPool);

impl TrialPool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map(TrialPool)
            .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))
    }

    /// Runs `f` with rayon's parallel iterators bound to this pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.0.install(f)
    }
}

/// Default worker count: the environment override, else available cores.
pub fn default_workers() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_item_visited_once() {
        for exec in [Executor::serial(), Executor::serial_reversed(), Executor::new(3).unwrap()] {
            let mut items: Vec<(usize, u32)> = (0..17).map(|i| (i, 0)).collect();
            exec.for_each(&mut items, |(_, hits)| *hits += 1);
            assert!(items.iter().all(|&(_, h)| h == 1));
        }
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(Executor::new(0).is_err());
    }
}
