//! Thin switch between rayon and sequential iteration.
//!
//! Every helper maps independent work items and collects results in input order,
//! so output never depends on scheduling or thread count.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when the crate was built with the `parallel` feature.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the global worker pool at `threads` (0 = rayon's default).
///
/// Must be called before any parallel work; later calls are rejected by rayon and
/// reported as an error string. A no-op in sequential builds.
pub fn configure_threads(threads: usize) -> std::result::Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return Ok(());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

pub(crate) fn map_range<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}

pub(crate) fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
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

/// Fills a row-major buffer row by row; `f(row, row_slice)`.
pub(crate) fn fill_rows<F>(data: &mut [f64], cols: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if cols == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row));
    }
}
