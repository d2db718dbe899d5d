//! Data-parallel helpers.
//!
//! Everything that fans out over independent samples (λ grids, contour
//! points, ensembles, α steps) goes through [`map`]. With the `parallel`
//! feature the work is spread over the rayon pool; without it, or with
//! [`Execution::Sequential`], it runs in order on the calling thread. Output
//! order always matches input order, so results do not depend on the mode.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    Parallel,
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

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs three independent closures, concurrently when allowed.
pub fn join3<A, B, C, FA, FB, FC>(exec: Execution, fa: FA, fb: FB, fc: FC) -> (A, B, C)
where
    A: Send,
    B: Send,
    C: Send,
    FA: FnOnce() -> A + Send,
    FB: FnOnce() -> B + Send,
    FC: FnOnce() -> C + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            let (a, (b, c)) = rayon::join(fa, || rayon::join(fb, fc));
            (a, b, c)
        }
        _ => (fa(), fb(), fc()),
    }
}

/// Sizes the global pool; a no-op without the `parallel` feature.
pub fn init_workers(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}
