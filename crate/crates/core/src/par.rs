//! Rayon when the `parallel` feature is on, plain iterators otherwise.
//!
//! Callers write `into_par_iter()` either way; without the feature it
//! resolves to `into_iter()` and the rest of the chain runs sequentially.

#[cfg(feature = "parallel")]
pub use rayon::prelude::*;

#[cfg(not(feature = "parallel"))]
mod sequential {
    pub trait IntoParallelIterator {
        type Iter: Iterator<Item = Self::Item>;
        type Item;
        fn into_par_iter(self) -> Self::Iter;
    }

    impl<I: IntoIterator> IntoParallelIterator for I {
        type Iter = I::IntoIter;
        type Item = I::Item;
        fn into_par_iter(self) -> Self::Iter {
            self.into_iter()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub use sequential::*;

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None`. Sequential builds ignore the worker count.
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T: Send>(_workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

/// Worker count the current context would use.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
