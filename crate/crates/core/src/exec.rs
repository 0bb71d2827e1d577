//! Replicate fan-out: rayon data-parallel by default, with a sequential
//! fallback when the `parallel` feature is disabled. Results are collected
//! in index order either way, so the two modes are bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Use the rayon pool when the `parallel` feature is on; otherwise
    /// identical to `Sequential`.
    #[default]
    Parallel,
    Sequential,
}

/// Maps `f` over `0..count`, preserving index order.
pub fn map_indexed<T, F>(mode: ExecMode, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..count).map(f).collect(),
        ExecMode::Parallel => map_parallel(count, f),
    }
}

#[cfg(feature = "parallel")]
fn map_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_preserve_order() {
        let sq = |i: usize| (i * i) as u64;
        let par = map_indexed(ExecMode::Parallel, 100, sq);
        let seq = map_indexed(ExecMode::Sequential, 100, sq);
        assert_eq!(par, seq);
        assert_eq!(par[7], 49);
    }
}
