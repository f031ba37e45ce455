//! Order-preserving parallel map. Results come back in input order, so the
//! worker count never affects output bytes.

use rayon::prelude::*;
use rayon::ThreadPoolBuilder;

/// Maps `f` over `items` on `workers` threads (0 = one per core).
pub fn ordered_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    if workers == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let pool = ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
}
