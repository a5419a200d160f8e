//! Data-parallel dispatch.  With the `parallel` feature the hot loops run on
//! rayon; a process-wide switch forces the sequential path so the two can be
//! compared in benchmarks and via `--jobs 1` in the CLI.  All reductions used
//! through this module are commutative and associative over exact values, so
//! results do not depend on the execution mode.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Execution mode for the data-parallel kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Parallel,
    Sequential,
}

pub fn set_mode(mode: Mode) {
    FORCE_SEQUENTIAL.store(mode == Mode::Sequential, Ordering::SeqCst);
}

pub fn mode() -> Mode {
    if cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst) {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// Map every item and fold the results with `combine`, starting from
/// `identity` values.
pub fn map_reduce<T, R, F, I, C>(items: Vec<T>, map: F, identity: I, combine: C) -> R
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
    I: Fn() -> R + Sync + Send,
    C: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode() == Mode::Parallel {
            use rayon::prelude::*;
            return items
                .into_par_iter()
                .fold(&identity, |acc, item| combine(acc, map(item)))
                .reduce(&identity, &combine);
        }
    }
    items
        .into_iter()
        .fold(identity(), |acc, item| combine(acc, map(item)))
}

/// Fold items into per-worker accumulators, then combine the accumulators.
pub fn fold_mut<T, R, F, I, C>(items: Vec<T>, fold: F, identity: I, combine: C) -> R
where
    T: Send,
    R: Send,
    F: Fn(&mut R, T) + Sync + Send,
    I: Fn() -> R + Sync + Send,
    C: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode() == Mode::Parallel {
            use rayon::prelude::*;
            return items
                .into_par_iter()
                .fold(&identity, |mut acc, item| {
                    fold(&mut acc, item);
                    acc
                })
                .reduce(&identity, &combine);
        }
    }
    let mut acc = identity();
    for item in items {
        fold(&mut acc, item);
    }
    acc
}

/// Map every item, preserving order.
pub fn map_collect<T, R, F>(items: Vec<T>, map: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode() == Mode::Parallel {
            use rayon::prelude::*;
            return items.into_par_iter().map(map).collect();
        }
    }
    items.into_iter().map(map).collect()
}
