//! Execution mode for the data-parallel loops (Monte Carlo batches, bootstrap
//! resamples, optimizer starts, sweep and grid points).
//!
//! Every parallel loop is an indexed map whose items own their RNG stream, so
//! both modes produce bit-identical results. Without the `parallel` feature
//! `Execution::Parallel` silently runs sequentially.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `(0..n).map(f)` with results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}
