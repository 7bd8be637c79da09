//! Data-parallel helpers. With the `parallel` feature (default) work is
//! spread over the rayon pool; without it the same helpers run
//! sequentially, so callers never branch on the feature themselves.
//!
//! Reductions are written so the result does not depend on thread count:
//! `max_by_index` breaks ties by the smallest index, and `map_collect`
//! preserves input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` and collects results in index order.
pub fn map_collect<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f` over `0..n` and returns the pair `(index, value)` with the
/// largest value, earliest index winning ties. Returns `None` for `n == 0`.
pub fn max_by_index<F>(n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let vals = map_collect(n, f);
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in vals.into_iter().enumerate() {
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Checks a predicate over `0..n`, returning indices of failures.
pub fn failing_indices<F>(n: usize, f: F) -> Vec<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    let oks = map_collect(n, f);
    oks.into_iter()
        .enumerate()
        .filter_map(|(i, ok)| (!ok).then_some(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_prefers_earliest_on_tie() {
        let (i, v) = max_by_index(5, |k| if k % 2 == 0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(i, 0);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn map_collect_is_ordered() {
        let v = map_collect(100, |i| i * i);
        assert_eq!(v[7], 49);
        assert_eq!(v.len(), 100);
    }
}
