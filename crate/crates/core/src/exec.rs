//! Pluggable execution of independent work items.
//!
//! The core crate has no threads. Operations that fan out over independent
//! items (secondary fits for distinct targets, outer folds) go through an
//! [`Executor`]; results always come back in index order, so any executor
//! produces the same output as [`Sequential`].

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `f(0), f(1), .., f(n - 1)` and returns the results in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}

impl<E: Executor> Executor for &E {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (**self).map(n, f)
    }
}
