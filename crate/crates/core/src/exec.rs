//! Execution strategy for embarrassingly parallel row workloads.
//!
//! With the `parallel` feature (the default) rows fan out over the rayon
//! pool; collection preserves input order, so results are identical to the
//! sequential fallback bit for bit.

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    F: Fn(I) -> O,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential variant, kept callable so benches can compare the two
/// strategies within one build.
pub(crate) fn map_ordered_serial<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    F: Fn(I) -> O,
{
    items.into_iter().map(f).collect()
}
