//! Tiny maybe-rayon layer: with the `parallel` feature the helpers fan out to
//! the rayon pool, without it they run the sequential equivalent. Both paths
//! produce identical results (order-preserving maps, deterministic reductions).

#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Sequential map over indices, kept available under either feature so the
/// benches can compare both code paths in one build.
pub fn map_indexed_seq<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Collect `f(i)` results that are `Some`, in ascending index order.
#[cfg(feature = "parallel")]
pub fn filter_map_indexed<T: Send, F: Fn(usize) -> Option<T> + Sync + Send>(
    n: usize,
    f: F,
) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().filter_map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn filter_map_indexed<T, F: Fn(usize) -> Option<T>>(n: usize, f: F) -> Vec<T> {
    (0..n).filter_map(f).collect()
}

pub fn filter_map_indexed_seq<T, F: Fn(usize) -> Option<T>>(n: usize, f: F) -> Vec<T> {
    (0..n).filter_map(f).collect()
}
