//! Execution-mode switch for the data-parallel inner loops.
//!
//! Independent jobs (per-pair regression fits, cross-validation cells, conv
//! output channels) run on rayon when the `parallel` feature is enabled and
//! the caller asks for [`ExecMode::Parallel`]. Results are always collected
//! by job index, so parallel and sequential runs produce bitwise-identical
//! output; `Sequential` additionally guarantees a single-threaded schedule.
//!
//! Without the `parallel` feature the crate compiles with no rayon
//! dependency and every mode degrades to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

impl ExecMode {
    pub fn is_sequential(self) -> bool {
        matches!(self, ExecMode::Sequential)
    }
}

/// Maps `f` over `jobs`, in parallel when the mode and feature allow it.
/// Output order matches input order.
pub fn map_jobs<I, T, F>(mode: ExecMode, jobs: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !mode.is_sequential() {
            return jobs.into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    jobs.into_iter().map(f).collect()
}

/// Index-space variant of [`map_jobs`].
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !mode.is_sequential() {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_job_order() {
        let jobs: Vec<usize> = (0..64).collect();
        let seq = map_jobs(ExecMode::Sequential, jobs.clone(), |i| i * 3);
        let par = map_jobs(ExecMode::Parallel, jobs, |i| i * 3);
        assert_eq!(seq, par);
        assert_eq!(seq[10], 30);
        assert_eq!(map_indexed(ExecMode::Parallel, 5, |i| i + 1), vec![1, 2, 3, 4, 5]);
    }
}
