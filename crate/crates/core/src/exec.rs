//! Data-parallel execution of index-addressed work items.
//!
//! With the `parallel` feature (default) work is spread over a rayon pool;
//! without it, or with a single worker, everything runs on the calling
//! thread. Work items are identified by index and derive their own seeds, so
//! the output is identical either way.

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

enum Mode {
    Sequential,
    #[cfg(feature = "parallel")]
    Global,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

pub struct Executor {
    mode: Mode,
}

impl Default for Executor {
    /// All available cores when built with `parallel`, otherwise sequential.
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Executor { mode: Mode::Global }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Executor::sequential()
        }
    }
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Executor(workers={})", self.workers())
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor { mode: Mode::Sequential }
    }

    /// `None` uses every core; `Some(1)` is sequential. Without the
    /// `parallel` feature the worker count is ignored.
    pub fn with_workers(workers: Option<usize>) -> Result<Self> {
        match workers {
            Some(0) => Err(Error::InvalidArgument("worker count must be at least 1".into())),
            Some(1) => Ok(Executor::sequential()),
            #[cfg(feature = "parallel")]
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(|pool| Executor { mode: Mode::Pool(pool) })
                .map_err(|e| Error::Pool(e.to_string())),
            #[cfg(not(feature = "parallel"))]
            Some(_) => Ok(Executor::sequential()),
            None => Ok(Executor::default()),
        }
    }

    pub fn workers(&self) -> usize {
        match &self.mode {
            Mode::Sequential => 1,
            #[cfg(feature = "parallel")]
            Mode::Global => rayon::current_num_threads(),
            #[cfg(feature = "parallel")]
            Mode::Pool(pool) => pool.current_num_threads(),
        }
    }

    /// `f(0..n)` collected in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.mode {
            Mode::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Mode::Global => (0..n).into_par_iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Mode::Pool(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    /// Number of indices in `0..n` for which `f` returns `true`.
    pub fn try_count<F>(&self, n: usize, f: F) -> Result<usize>
    where
        F: Fn(usize) -> Result<bool> + Sync + Send,
    {
        match &self.mode {
            Mode::Sequential => (0..n).try_fold(0usize, |acc, i| Ok(acc + usize::from(f(i)?))),
            #[cfg(feature = "parallel")]
            Mode::Global => par_count(n, &f),
            #[cfg(feature = "parallel")]
            Mode::Pool(pool) => pool.install(|| par_count(n, &f)),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_count<F>(n: usize, f: &F) -> Result<usize>
where
    F: Fn(usize) -> Result<bool> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(i).map(usize::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}
