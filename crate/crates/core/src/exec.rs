//! Data-parallel helpers. With the `parallel` feature (default) the maps run
//! on the rayon pool; without it they fall back to plain iterators. Results
//! are always returned in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..len`, collecting results in index order.
pub fn map_indexed<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Sequential counterpart of [`map_indexed`], always available so the two
/// paths can be compared in the same build.
pub fn map_indexed_seq<R, F>(len: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..len).map(f).collect()
}

/// Maximum of `f` over `0..len` (0.0 for an empty range). NaN propagates.
pub fn max_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(len, f)
        .into_iter()
        .fold(0.0_f64, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

/// Whether the parallel path is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
