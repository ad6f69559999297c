//! Batch mapping over independent synthesis inputs.
//!
//! Synthesis is pure-functional, so batches of inputs are embarrassingly
//! parallel. With the `parallel` feature (on by default) [`par_map`] fans
//! the work across the rayon thread pool; without it the same call
//! degrades to the sequential loop of [`seq_map`]. Both preserve input
//! order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over the items, in parallel when the `parallel` feature is
/// enabled. Output order matches input order either way.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    items.into_par_iter().map(f).collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    seq_map(items, f)
}

/// Maps `f` over the items one at a time, preserving order. Baseline for
/// the parallel path in benchmarks.
pub fn seq_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_agrees_with_seq_map_and_keeps_order() {
        let items: Vec<u64> = (0..256).collect();
        let f = |x: u64| x.wrapping_mul(0x9e3779b97f4a7c15).rotate_left(17);
        let par = par_map(items.clone(), f);
        let seq = seq_map(items, f);
        assert_eq!(par, seq);
    }

    #[test]
    fn empty_batch_yields_empty_output() {
        let out: Vec<i32> = par_map(Vec::<i32>::new(), |x| x + 1);
        assert!(out.is_empty());
    }
}
