//! Data-parallel execution with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`map_indexed`] or
//! [`try_map_indexed`]. Results are always collected in index order, so the
//! output never depends on the scheduling or on the number of threads. With
//! the `parallel` feature disabled, [`Parallelism::Parallel`] silently runs on
//! the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a data-parallel loop is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether this build actually runs [`Parallelism::Parallel`] loops on a
    /// thread pool.
    pub fn is_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Sizes the global worker pool. Must run before the first parallel loop;
/// affects wall time only.
pub fn set_thread_count(threads: usize) -> crate::Result<()> {
    if threads == 0 {
        return Err(crate::Error::invalid("thread count must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::Error::Config(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    log::debug!("built without the parallel feature; ignoring {threads} threads");
    Ok(())
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Fallible variant of [`map_indexed`]; stops at the first error.
pub fn try_map_indexed<T, E, F>(n: usize, par: Parallelism, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Slots per task in [`fill_indexed`]; a slot is typically a few hundred
/// nanoseconds of work.
#[cfg(feature = "parallel")]
const FILL_MIN_LEN: usize = 64;

/// Fills `out[k] = f(k)` for every slot.
pub fn fill_indexed<T, F>(out: &mut [T], par: Parallelism, f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => out
            .par_iter_mut()
            .enumerate()
            .with_min_len(FILL_MIN_LEN)
            .for_each(|(k, slot)| *slot = f(k)),
        _ => out
            .iter_mut()
            .enumerate()
            .for_each(|(k, slot)| *slot = f(k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(1000, Parallelism::Sequential, |k| k * k);
        let par = map_indexed(1000, Parallelism::Parallel, |k| k * k);
        assert_eq!(seq, par);
    }

    #[test]
    fn first_error_aborts() {
        let r: Result<Vec<usize>, String> = try_map_indexed(10, Parallelism::Parallel, |k| {
            if k == 7 {
                Err("boom".to_string())
            } else {
                Ok(k)
            }
        });
        assert_eq!(r.unwrap_err(), "boom");
    }

    #[test]
    fn fill_matches_map() {
        let mut out = vec![0.0; 64];
        fill_indexed(&mut out, Parallelism::Parallel, |k| k as f64 * 0.5);
        assert_eq!(
            out,
            map_indexed(64, Parallelism::Sequential, |k| k as f64 * 0.5)
        );
    }
}
