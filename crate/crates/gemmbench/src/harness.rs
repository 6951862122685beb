//! Executes one experiment point: problem generation, the reference result,
//! `R` timed repetitions with per-repetition validation and energy, and the
//! throughput statistics.

use std::collections::BTreeMap;

use gemmbench_core::point::matrix_digest;
use gemmbench_core::{
    compute_stats, estimate_energy, generate_problem, gflops, point_id, reference_gemm, validate, Element,
    EnergyEstimate, ExperimentPoint, KernelError, KernelPlan, LaunchConfig, PowerSample, PowerSensor, Precision,
};

use crate::engine::{execute_timed, Dispatch};
use crate::registry::Registry;

/// Shortest elapsed time recorded for a repetition, so throughput stays finite.
pub const MIN_ELAPSED_SECONDS: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dispatch: Dispatch,
    /// Platform description copied into the point.
    pub environment: BTreeMap<String, String>,
}

/// Runs `config` against `registry`. Sensor failures are recorded in the
/// point and never abort it.
pub fn run_point(
    config: &LaunchConfig,
    registry: &Registry,
    sensor: Option<&mut dyn PowerSensor>,
    options: &RunOptions,
) -> Result<ExperimentPoint, KernelError> {
    if registry.get(&config.kernel.name).is_none() {
        return Err(KernelError::Config(format!("kernel `{}` is not in the registry", config.kernel.name)));
    }
    config.check()?;
    match config.kernel.precision {
        Precision::S => run_typed::<f32>(config, sensor, options),
        Precision::D => run_typed::<f64>(config, sensor, options),
    }
}

fn read_all(
    sensor: &mut dyn PowerSensor,
    channels: &[String],
    errors: &mut Vec<String>,
    rep: usize,
) -> Vec<Option<PowerSample>> {
    channels
        .iter()
        .map(|ch| match sensor.read(ch) {
            Ok(s) if s.watts.is_finite() && s.watts >= 0.0 => Some(s),
            Ok(s) => {
                errors.push(format!("repetition {rep}: channel `{ch}` reported {} W", s.watts));
                None
            }
            Err(e) => {
                errors.push(format!("repetition {rep}: {e}"));
                None
            }
        })
        .collect()
}

fn run_typed<T: Element>(
    config: &LaunchConfig,
    mut sensor: Option<&mut dyn PowerSensor>,
    options: &RunOptions,
) -> Result<ExperimentPoint, KernelError> {
    let spec = &config.kernel;
    let problem = generate_problem::<T>(config.n, config.seed, config.alpha, config.beta);
    let plan = KernelPlan::new(spec, config, &problem)?;
    let reference = reference_gemm(&problem, spec.layout());
    let problem_digest = matrix_digest(&[&problem.a, &problem.b, &problem.c_initial]);

    if config.warmup {
        let mut c = problem.c_initial.clone();
        execute_timed(&plan, &mut c, options.dispatch);
    }

    let channels = sensor.as_ref().map(|s| s.channels()).unwrap_or_default();
    let reps = config.repetitions;
    let mut elapsed_seconds = Vec::with_capacity(reps);
    let mut gflops_per_rep = Vec::with_capacity(reps);
    let mut validations = Vec::with_capacity(reps);
    let mut energy = Vec::new();
    let mut sensor_errors = Vec::new();
    let mut result_digest = None;

    for rep in 0..reps {
        let mut c = problem.c_initial.clone();
        let before = sensor.as_deref_mut().map(|s| read_all(s, &channels, &mut sensor_errors, rep));
        let dt = execute_timed(&plan, &mut c, options.dispatch);
        let after = sensor.as_deref_mut().map(|s| read_all(s, &channels, &mut sensor_errors, rep));

        let secs = dt.as_secs_f64().max(MIN_ELAPSED_SECONDS);
        elapsed_seconds.push(secs);
        gflops_per_rep.push(gflops(config.n as u64, secs));

        if let (Some(before), Some(after)) = (before, after) {
            let estimates: Vec<EnergyEstimate> = before
                .iter()
                .zip(&after)
                .filter_map(|(b, a)| match (b, a) {
                    (Some(b), Some(a)) => match estimate_energy(b, a, secs) {
                        Ok(e) => Some(e),
                        Err(e) => {
                            sensor_errors.push(format!("repetition {rep}: {e}"));
                            None
                        }
                    },
                    _ => None,
                })
                .collect();
            energy.push(estimates);
        }

        let report = validate(&c, &reference, config.epsilon).map_err(|e| KernelError::Config(e.to_string()))?;
        validations.push(report);
        if result_digest.is_none() {
            result_digest = Some(matrix_digest(&[&c]));
        }
    }

    let summary = compute_stats(&gflops_per_rep).expect("at least one repetition");
    Ok(ExperimentPoint {
        point_id: point_id(config),
        replay: None,
        config: config.clone(),
        skipped: None,
        elapsed_seconds,
        gflops_per_rep,
        mean: Some(summary.mean),
        std: summary.std,
        validations,
        energy,
        sensor_errors,
        problem_digest: Some(problem_digest),
        result_digest,
        environment: options.environment.clone(),
    })
}
