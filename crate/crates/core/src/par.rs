//! Data-parallel kernels with a sequential fallback.
//!
//! Every reduction splits its index range into fixed-size chunks, reduces each
//! chunk independently and then folds the chunk results in index order. The
//! result is therefore identical for any thread count and for the sequential
//! path.

use std::ops::Range;

/// Fixed chunk length for deterministic reductions.
pub const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

fn chunks(n: usize, chunk: usize) -> Vec<Range<usize>> {
    (0..n.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(n))
        .collect()
}

/// Maps each chunk of `0..n` through `f` and returns the chunk results in order.
pub fn map_chunks<T, F>(exec: Exec, n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = chunks(n, chunk.max(1));
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return ranges.into_par_iter().map(f).collect();
    }
    let _ = exec;
    ranges.into_iter().map(f).collect()
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn sum<F>(exec: Exec, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_chunks(exec, n, CHUNK, |r| r.map(&f).sum::<f64>())
        .into_iter()
        .sum()
}

/// Exact count of indices satisfying `pred`.
pub fn count<F>(exec: Exec, n: usize, pred: F) -> u64
where
    F: Fn(usize) -> bool + Sync + Send,
{
    map_chunks(exec, n, CHUNK, |r| r.filter(|&i| pred(i)).count() as u64)
        .into_iter()
        .sum()
}

/// Builds a vector with `out[i] = f(i)`.
pub fn collect<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_chunks(exec, n, CHUNK, |r| r.map(&f).collect::<Vec<T>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Applies `f` to every item of a slice, preserving order.
pub fn map_slice<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Runs a closure inside a pool with `threads` workers (0 = default pool).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_identical_across_policies() {
        let f = |i: usize| 1.0 / (1.0 + i as f64).sqrt();
        let a = sum(Exec::Sequential, 100_000, f);
        let b = sum(Exec::Parallel, 100_000, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn collect_preserves_order() {
        let v = collect(Exec::Parallel, 10_000, |i| i * 3);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 3 * i));
        assert_eq!(count(Exec::Parallel, 10_000, |i| i % 7 == 0), 1429);
    }

    #[test]
    fn empty_ranges() {
        assert_eq!(sum(Exec::Parallel, 0, |_| 1.0), 0.0);
        assert!(collect(Exec::Sequential, 0, |i| i).is_empty());
    }
}
