use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};

use featgen_core::Executor;

/// Runs work items on up to `jobs` scoped threads. Items are claimed from a
/// shared counter and results are put back in index order, so the output
/// matches [`featgen_core::Sequential`].
#[derive(Debug, Clone, Copy)]
pub struct Threads {
    jobs: NonZeroUsize,
}

impl Threads {
    pub fn new(jobs: usize) -> Self {
        Threads {
            jobs: NonZeroUsize::new(jobs).unwrap_or(NonZeroUsize::MIN),
        }
    }

    /// One thread per available core.
    pub fn available() -> Self {
        Threads {
            jobs: std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN),
        }
    }

    pub fn jobs(&self) -> usize {
        self.jobs.get()
    }
}

impl Executor for Threads {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let workers = self.jobs.get().min(n);
        if workers <= 1 {
            return (0..n).map(f).collect();
        }
        let next = AtomicUsize::new(0);
        let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut out = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= n {
                                break out;
                            }
                            out.push((i, f(i)));
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
                .collect()
        });
        let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
        for (i, v) in parts.drain(..).flatten() {
            slots[i] = Some(v);
        }
        slots.into_iter().map(|v| v.expect("every index claimed once")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_in_index_order() {
        for jobs in [1, 2, 4, 16] {
            let out = Threads::new(jobs).map(100, |i| i * i);
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(Threads::new(3).map(0, |i| i).is_empty());
        assert_eq!(Threads::new(0).jobs(), 1);
    }
}
