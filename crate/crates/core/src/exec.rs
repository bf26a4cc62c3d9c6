//! Data-parallel loops over index ranges.
//!
//! With the `parallel` feature (default) these run on rayon's global pool;
//! without it they are plain sequential loops. Every helper produces results
//! that do not depend on how the range was split.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f(i)` for every `i` in `0..n`, collected in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// `f` applied to each element of a slice, in order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Fold over `0..n` with per-worker accumulators merged by `merge`.
/// `merge` must be associative and `init()` its identity.
pub fn fold_range<A, I, F, M>(n: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().fold(&init, &fold).reduce(&init, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = &merge;
        (0..n).fold(init(), fold)
    }
}

/// Smallest `i` in `0..n` with `f(i)` returning `Some`, and that value.
pub fn find_first<T, F>(n: usize, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().filter_map(|i| f(i).map(|t| (i, t))).find_first(|_| true)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).find_map(|i| f(i).map(|t| (i, t)))
    }
}

/// Runs `f` with at most `threads` workers. Without the `parallel`
/// feature this just calls `f`.
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(threads: usize, f: F) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("failed to build thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_and_fold_agree_with_sequential() {
        let v = map_range(1000, |i| i * i);
        assert_eq!(v, (0..1000).map(|i| i * i).collect::<Vec<_>>());
        let s = fold_range(1000, || 0u64, |a, i| a + i as u64, |a, b| a + b);
        assert_eq!(s, 499_500);
        assert_eq!(find_first(100, |i| (i % 37 == 36).then_some(i * 2)), Some((36, 72)));
        assert_eq!(find_first(10, |_| None::<()>), None);
        assert_eq!(with_threads(1, || map_slice(&[1, 2, 3], |x| x + 1)), vec![2, 3, 4]);
    }
}
