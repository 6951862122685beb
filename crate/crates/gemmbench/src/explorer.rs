//! Parameter sweeps over matrix order and work-group shape.
//!
//! Points run one after another. A configuration that violates divisibility
//! is kept as a skipped record rather than dropped.

use gemmbench_core::{
    select_winner, ExperimentPoint, KernelError, KernelSpec, LaunchConfig, PowerSensor, ShapeHeuristic, TileShape,
};

use crate::harness::{run_point, RunOptions};
use crate::registry::Registry;
use crate::repository::{RepoError, Repository};

/// Where sweep points are persisted.
#[derive(Debug, Clone, Copy)]
pub struct Target<'a> {
    pub repo: &'a Repository,
    pub experiment_id: &'a str,
    /// Store points that already exist as replays instead of failing.
    pub append: bool,
}

impl Target<'_> {
    fn store(&self, point: &mut ExperimentPoint) -> Result<(), RepoError> {
        let path = self.repo.points_path(self.experiment_id, &point.point_id);
        let replay = self.append && path.is_file();
        let stored = self.repo.store_point(self.experiment_id, point, replay)?;
        point.replay = stored.replay;
        Ok(())
    }
}

/// Per `(order, total)`, the best shape among the points that ran.
#[derive(Debug, Clone, PartialEq)]
pub struct TileWinner {
    pub order: usize,
    pub total: usize,
    pub shape: TileShape,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileSweep {
    pub points: Vec<ExperimentPoint>,
    pub winners: Vec<TileWinner>,
}

fn sorted_unique(values: &[usize]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn reborrow<'s>(sensor: &'s mut Option<&mut dyn PowerSensor>) -> Option<&'s mut dyn PowerSensor> {
    match sensor {
        Some(s) => Some(&mut **s),
        None => None,
    }
}

fn run_or_skip(
    config: LaunchConfig,
    registry: &Registry,
    sensor: Option<&mut dyn PowerSensor>,
    options: &RunOptions,
    target: Option<&Target<'_>>,
) -> Result<ExperimentPoint, RepoError> {
    config.check_settings()?;
    let mut point = match config.check_divisibility() {
        Err(KernelError::Config(reason)) => {
            let mut p = ExperimentPoint::skipped(config, reason);
            p.environment = options.environment.clone();
            p
        }
        Err(e) => return Err(e.into()),
        Ok(()) => run_point(&config, registry, sensor, options)?,
    };
    if let Some(t) = target {
        t.store(&mut point)?;
    }
    Ok(point)
}

/// One point per `(kernel, order)`, kernels by name and orders ascending.
pub fn explore_order(
    kernels: &[KernelSpec],
    orders: &[usize],
    base: &LaunchConfig,
    registry: &Registry,
    mut sensor: Option<&mut dyn PowerSensor>,
    options: &RunOptions,
    target: Option<&Target<'_>>,
) -> Result<Vec<ExperimentPoint>, RepoError> {
    let mut kernels: Vec<&KernelSpec> = kernels.iter().collect();
    kernels.sort_by(|a, b| a.name.cmp(&b.name));
    let orders = sorted_unique(orders);
    let mut points = Vec::with_capacity(kernels.len() * orders.len());
    for spec in kernels {
        for &n in &orders {
            let config = LaunchConfig { kernel: spec.clone(), n, ..base.clone() };
            points.push(run_or_skip(config, registry, reborrow(&mut sensor), options, target)?);
        }
    }
    Ok(points)
}

/// Runs every admitted shape of every total at every order, orders and
/// totals ascending, shapes by ascending `s_j`.
#[allow(clippy::too_many_arguments)]
pub fn explore_tiles(
    kernel: &KernelSpec,
    orders: &[usize],
    totals: &[usize],
    heuristic: ShapeHeuristic,
    base: &LaunchConfig,
    registry: &Registry,
    mut sensor: Option<&mut dyn PowerSensor>,
    options: &RunOptions,
    target: Option<&Target<'_>>,
) -> Result<TileSweep, RepoError> {
    let mut points = Vec::new();
    let mut winners = Vec::new();
    for n in sorted_unique(orders) {
        for total in sorted_unique(totals) {
            if total == 0 {
                return Err(KernelError::Config("work-group total must be positive".into()).into());
            }
            let mut ran = Vec::new();
            for shape in heuristic.shapes(total) {
                let config = LaunchConfig { kernel: kernel.clone(), n, tile: shape, ..base.clone() };
                let point = run_or_skip(config, registry, reborrow(&mut sensor), options, target)?;
                if let Some(mean) = point.mean {
                    ran.push((shape, mean));
                }
                points.push(point);
            }
            if let Some((shape, mean)) = select_winner(ran) {
                winners.push(TileWinner { order: n, total, shape, mean });
            }
        }
    }
    Ok(TileSweep { points, winners })
}
