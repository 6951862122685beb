//! Timed kernel dispatch.

use std::time::{Duration, Instant};

use gemmbench_core::{Element, KernelError, KernelPlan, KernelSpec, LaunchConfig, Matrix, ProblemInstance};
use rayon::prelude::*;

/// How work-group bands are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dispatch {
    Sequential,
    /// Bands run on the rayon thread pool.
    #[default]
    Parallel,
}

/// Runs one kernel launch from `problem.c_initial` and times the dispatch
/// region only: the copy of the starting C happens before the clock starts.
pub fn run_kernel<T: Element>(
    spec: &KernelSpec,
    config: &LaunchConfig,
    problem: &ProblemInstance<T>,
    dispatch: Dispatch,
) -> Result<(Matrix<T>, Duration), KernelError> {
    let plan = KernelPlan::new(spec, config, problem)?;
    let mut c = problem.c_initial.clone();
    let elapsed = execute_timed(&plan, &mut c, dispatch);
    Ok((c, elapsed))
}

/// Executes `plan` into `c` (which must hold the starting C) and returns the
/// wall-clock time of the dispatch.
pub fn execute_timed<T: Element>(plan: &KernelPlan<'_, T>, c: &mut Matrix<T>, dispatch: Dispatch) -> Duration {
    let len = plan.band_len();
    let start = Instant::now();
    match dispatch {
        Dispatch::Sequential => plan.execute(c),
        Dispatch::Parallel => {
            c.as_mut_slice().par_chunks_mut(len).enumerate().for_each(|(band, rows)| plan.compute_band(band, rows))
        }
    }
    start.elapsed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use gemmbench_core::{generate_problem, reference_gemm, TileShape};

    use crate::registry::Registry;

    #[test]
    fn parallel_equals_sequential() {
        let registry = Registry::bundled();
        let p = generate_problem::<f32>(64, 5, 1.5, 0.5);
        for name in ["SGEMM_NT_1x1", "SGEMM_NT_4x1", "SGEMM_NT_4x1_barrier"] {
            let spec = registry.get(name).unwrap();
            let mut cfg = LaunchConfig::new(spec.clone(), 64);
            cfg.tile = TileShape::new(2, 4);
            let (seq, _) = run_kernel(spec, &cfg, &p, Dispatch::Sequential).unwrap();
            let (par, _) = run_kernel(spec, &cfg, &p, Dispatch::Parallel).unwrap();
            assert!(seq.bit_eq(&par));
            assert!(seq.bit_eq(&reference_gemm(&p, spec.layout())));
        }
    }
}
