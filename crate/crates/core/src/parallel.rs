//! Deterministic data-parallel execution of the per-family steps.
//!
//! This is the only module that spawns threads. Every map writes item `k`
//! into output slot `k` and performs no cross-item floating-point reduction,
//! so results are bitwise identical for any worker count. Reductions
//! (`farthest_from`) run sequentially after the map returns.
//!
//! Built without the `parallel` feature, every plan runs sequentially.

use std::fmt;
#[cfg(feature = "parallel")]
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone)]
pub struct ParallelPlan {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl ParallelPlan {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::config("workers must be at least 1"));
        }
        #[cfg(feature = "parallel")]
        {
            let pool = if workers > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| format!("equihybrid-{i}"))
                    .build()
                    .map_err(|e| Error::config(format!("cannot start {workers} workers: {e}")))?;
                Some(Arc::new(pool))
            } else {
                None
            };
            Ok(ParallelPlan { workers, pool })
        }
        #[cfg(not(feature = "parallel"))]
        Ok(ParallelPlan { workers })
    }

    pub fn sequential() -> Self {
        ParallelPlan {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Static block size: `len` split into at most `workers` contiguous chunks.
    pub fn chunk_size(&self, len: usize) -> usize {
        len.div_ceil(self.workers).max(1)
    }

    /// Evaluates `op(0), …, op(len − 1)` and returns the values in index order.
    pub fn map<T, F>(&self, len: usize, op: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            if len > 1 {
                let chunk = self.chunk_size(len);
                let mut out = Vec::with_capacity(len);
                pool.install(|| {
                    (0..len)
                        .into_par_iter()
                        .with_min_len(chunk)
                        .map(&op)
                        .collect_into_vec(&mut out)
                });
                return out;
            }
        }
        (0..len).map(op).collect()
    }

    /// Like [`map`](Self::map), but fails with an aggregate error naming every
    /// failing index.
    pub fn try_map<T, F>(&self, len: usize, op: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        let results = self.map(len, op);
        let failed: Vec<usize> = results
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.is_err().then_some(i))
            .collect();
        if failed.is_empty() {
            return Ok(results
                .into_iter()
                .map(|r| r.unwrap_or_else(|_| unreachable!("failures checked above")))
                .collect());
        }
        let first = results.into_iter().find_map(|r| r.err()).expect("at least one failure");
        Err(Error::Parallel {
            failed,
            total: len,
            first: Box::new(first),
        })
    }
}

impl fmt::Debug for ParallelPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParallelPlan").field("workers", &self.workers).finish()
    }
}

/// Smallest index attaining `max_i ‖points[i] − anchor‖`.
///
/// Squared distances are compared, and ties go to the earlier index.
pub fn farthest_from(points: &[Point], anchor: &Point) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = p.dist_sq(anchor);
        match best {
            Some((_, bd)) if d <= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, d)| (i, d.sqrt()))
        .ok_or_else(|| Error::config("farthest_from called with an empty list"))
}

/// Number of worker threads the machine offers.
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
