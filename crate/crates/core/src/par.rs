//! Data-parallel helpers. With the `parallel` feature the loops run on the
//! rayon pool; without it they run sequentially. Every helper produces the
//! same output in both modes: work items are independent and any reduction
//! is done afterwards in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0..n)` and collects the results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Calls `f(row_index, row)` for each `width`-long row of `data`.
#[cfg(feature = "parallel")]
pub fn for_each_row<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    data.par_chunks_mut(width).enumerate().for_each(|(j, row)| f(j, row));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_row<T, F>(data: &mut [T], width: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    data.chunks_mut(width).enumerate().for_each(|(j, row)| f(j, row));
}

/// Per-row partial sums combined sequentially, so the result does not
/// depend on the thread schedule.
pub fn row_sum<T, F>(data: &[T], width: usize, f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &[T]) -> f64 + Sync + Send,
{
    let rows = data.len() / width;
    map_range(rows, |j| f(j, &data[j * width..(j + 1) * width])).into_iter().sum()
}
