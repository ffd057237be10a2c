//! Data-parallel map helper with a sequential fallback.
//!
//! Every hot loop in the crate (Monte Carlo draws, per-UE quadratures,
//! exhaustive searches, sweep points) funnels through [`map_indexed`], so the
//! `parallel` feature flag switches the whole crate between rayon and plain
//! iterators in one place.  Results are collected in index order and any
//! reduction happens sequentially afterwards, which keeps outputs bit-identical
//! across thread counts and across the two modes.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..n).map(f).collect()
}

/// Name of the active execution mode, used by benches and diagnostics.
pub fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}
