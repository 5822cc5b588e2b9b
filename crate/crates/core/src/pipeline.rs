//! End-to-end parallel evaluation: subdivide, expand, glue, finalize.

use thiserror::Error;

use crate::diagram::Diagram;
use crate::pairing::Pairing;
use crate::recombine::{run_plan, run_plan_here, RecombineError, RunOutput};
use crate::subdivide::{subdivide, SubdivideError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Subdivide(#[from] SubdivideError),
    #[error(transparent)]
    Recombine(#[from] RecombineError),
}

/// Deepest subdivision for `n` crossings: every piece keeps a crossing.
pub fn max_depth(n: usize) -> u32 {
    if n < 2 {
        0
    } else {
        n.ilog2()
    }
}

/// `ceil(log2 workers)`: one piece per worker.
pub fn default_depth(workers: usize) -> u32 {
    workers.max(1).next_power_of_two().ilog2()
}

/// Subdivides to depth `m` with bisection seed `seed` and evaluates on a
/// fresh pool of `workers` threads.
pub fn compute(
    d: &Diagram,
    sigma: Option<&Pairing>,
    m: u32,
    workers: usize,
    seed: u64,
) -> Result<RunOutput, PipelineError> {
    let plan = subdivide(d, m, seed)?;
    Ok(run_plan(&plan, workers, sigma)?)
}

/// As [`compute`], on the current rayon pool.
pub fn compute_here(d: &Diagram, sigma: Option<&Pairing>, m: u32, seed: u64) -> Result<RunOutput, PipelineError> {
    let plan = subdivide(d, m, seed)?;
    Ok(run_plan_here(&plan, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::jones;
    use crate::generate::torus_2n;

    #[test]
    fn depths() {
        assert_eq!(max_depth(0), 0);
        assert_eq!(max_depth(3), 1);
        assert_eq!(max_depth(4), 2);
        assert_eq!(default_depth(1), 0);
        assert_eq!(default_depth(2), 1);
        assert_eq!(default_depth(3), 2);
        assert_eq!(default_depth(8), 3);
    }

    #[test]
    fn matches_serial() {
        let d = torus_2n(7);
        let want = jones(&d, None).unwrap();
        for m in 0..=max_depth(7) {
            assert_eq!(compute(&d, None, m, 2, 0).unwrap().polynomial, want);
        }
        assert!(matches!(compute(&d, None, 3, 2, 0), Err(PipelineError::Subdivide(_))));
    }
}
