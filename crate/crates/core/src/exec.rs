//! Execution strategy for the exhaustive sweeps.
//!
//! Every sweep in this crate is an order-independent reduction over an index
//! range (measurements, subsets, hidden assignments). [`Exec::Parallel`] splits
//! the range across the rayon pool when the `parallel` feature is enabled and
//! silently degrades to a sequential loop otherwise, so callers never need
//! their own `cfg` gates.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when this strategy will actually use more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps every index in `0..len` and folds the results with `reduce`.
    ///
    /// `reduce` must be associative and `identity` its neutral element; the
    /// result is then independent of how the range was split.
    pub fn map_reduce<T, M, R, I>(self, len: u64, identity: I, map: M, reduce: R) -> T
    where
        T: Send,
        M: Fn(u64) -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
        I: Fn() -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..len)
                .into_par_iter()
                .map(&map)
                .reduce(&identity, &reduce);
        }
        (0..len).map(map).fold(identity(), reduce)
    }

    /// Maps every index and collects the results in index order.
    pub fn map_collect<T, M>(self, len: u64, map: M) -> Vec<T>
    where
        T: Send,
        M: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(map).collect();
        }
        (0..len).map(map).collect()
    }
}
