//! Plain-directory experiment repository.
//!
//! ```text
//! <repo>/<experiment_id>/meta.json
//! <repo>/<experiment_id>/points/<point_id>.json       original run
//! <repo>/<experiment_id>/points/<point_id>.r<k>.json  k-th replay
//! ```
//!
//! Entries are append-only: nothing is ever overwritten.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gemmbench_core::{ExperimentPoint, KernelError, PowerSensor};
use serde::{Deserialize, Serialize};

use crate::environment::TOOL_VERSION;
use crate::harness::{run_point, RunOptions};
use crate::registry::Registry;

#[derive(Debug, thiserror::Error)]
pub enum RepoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("{0} already exists; store it as a replay to append")]
    DuplicateWithoutReplayFlag(PathBuf),
    #[error("invalid experiment id `{0}`")]
    InvalidId(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub experiment_id: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub tool_version: String,
    #[serde(default)]
    pub environment: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentEntry {
    pub meta: ExperimentMeta,
    /// Ordered by `(point_id, replay counter)`, originals first.
    pub points: Vec<ExperimentPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredPoint {
    pub path: PathBuf,
    pub replay: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct Repository {
    root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RepoError + '_ {
    move |source| RepoError::Io { path: path.to_path_buf(), source }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, RepoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| RepoError::Json { path: path.to_path_buf(), source })
}

/// Writes `value` to a file that must not exist yet. Returns `Ok(false)` if it does.
fn write_new<T: Serialize>(path: &Path, value: &T) -> Result<bool, RepoError> {
    let mut text = serde_json::to_string_pretty(value).expect("records serialize");
    text.push('\n');
    match OpenOptions::new().write(true).create_new(true).open(path) {
        Ok(mut f) => {
            f.write_all(text.as_bytes()).map_err(io_err(path))?;
            Ok(true)
        }
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Ok(false),
        Err(e) => Err(io_err(path)(e)),
    }
}

fn check_id(id: &str) -> Result<(), RepoError> {
    let ok = !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(RepoError::InvalidId(id.to_string()))
    }
}

impl Repository {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Repository { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn experiment_dir(&self, experiment_id: &str) -> PathBuf {
        self.root.join(experiment_id)
    }

    fn points_dir(&self, experiment_id: &str) -> PathBuf {
        self.experiment_dir(experiment_id).join("points")
    }

    /// Path of the original record for `point_id`.
    pub fn points_path(&self, experiment_id: &str, point_id: &str) -> PathBuf {
        self.points_dir(experiment_id).join(format!("{point_id}.json"))
    }

    /// Creates the experiment if needed and returns its metadata. An existing
    /// `meta.json` is left untouched.
    pub fn ensure_experiment(
        &self,
        experiment_id: &str,
        environment: &BTreeMap<String, String>,
    ) -> Result<ExperimentMeta, RepoError> {
        check_id(experiment_id)?;
        let points = self.points_dir(experiment_id);
        fs::create_dir_all(&points).map_err(io_err(&points))?;
        let meta_path = self.experiment_dir(experiment_id).join("meta.json");
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = ExperimentMeta {
            experiment_id: experiment_id.to_string(),
            created,
            tool_version: TOOL_VERSION.to_string(),
            environment: environment.clone(),
        };
        if write_new(&meta_path, &meta)? {
            Ok(meta)
        } else {
            read_json(&meta_path)
        }
    }

    pub fn load_meta(&self, experiment_id: &str) -> Result<ExperimentMeta, RepoError> {
        check_id(experiment_id)?;
        let path = self.experiment_dir(experiment_id).join("meta.json");
        if !path.is_file() {
            return Err(RepoError::NotFound(format!("experiment `{experiment_id}`")));
        }
        read_json(&path)
    }

    /// Persists `point`. Without `replay` the record goes to `<id>.json` and an
    /// existing file is an error; with `replay` it goes to the next free
    /// `<id>.r<k>.json` and the stored record carries `replay = k`.
    pub fn store_point(
        &self,
        experiment_id: &str,
        point: &ExperimentPoint,
        replay: bool,
    ) -> Result<StoredPoint, RepoError> {
        self.ensure_experiment(experiment_id, &point.environment)?;
        check_id(&point.point_id).map_err(|_| RepoError::InvalidId(point.point_id.clone()))?;
        let dir = self.points_dir(experiment_id);
        if !replay {
            let path = dir.join(format!("{}.json", point.point_id));
            let mut record = point.clone();
            record.replay = None;
            return if write_new(&path, &record)? {
                Ok(StoredPoint { path, replay: None })
            } else {
                Err(RepoError::DuplicateWithoutReplayFlag(path))
            };
        }
        for k in 1u32.. {
            let path = dir.join(format!("{}.r{k}.json", point.point_id));
            let mut record = point.clone();
            record.replay = Some(k);
            if write_new(&path, &record)? {
                return Ok(StoredPoint { path, replay: Some(k) });
            }
        }
        unreachable!("replay counter exhausted")
    }

    /// Loads one record: the original when `replay` is `None`.
    pub fn load_point(
        &self,
        experiment_id: &str,
        point_id: &str,
        replay: Option<u32>,
    ) -> Result<ExperimentPoint, RepoError> {
        self.load_meta(experiment_id)?;
        check_id(point_id).map_err(|_| RepoError::NotFound(format!("point `{point_id}`")))?;
        let file = match replay {
            None => format!("{point_id}.json"),
            Some(k) => format!("{point_id}.r{k}.json"),
        };
        let path = self.points_dir(experiment_id).join(file);
        if !path.is_file() {
            return Err(RepoError::NotFound(format!("point `{point_id}` in experiment `{experiment_id}`")));
        }
        read_json(&path)
    }

    pub fn load_experiment(&self, experiment_id: &str) -> Result<ExperimentEntry, RepoError> {
        let meta = self.load_meta(experiment_id)?;
        let dir = self.points_dir(experiment_id);
        let mut points = Vec::new();
        if dir.is_dir() {
            for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
                let path = entry.map_err(io_err(&dir))?.path();
                if path.extension().is_some_and(|e| e == "json") {
                    points.push(read_json::<ExperimentPoint>(&path)?);
                }
            }
        }
        points.sort_by(|a, b| (&a.point_id, a.replay).cmp(&(&b.point_id, b.replay)));
        Ok(ExperimentEntry { meta, points })
    }

    pub fn list_experiments(&self) -> Result<Vec<String>, RepoError> {
        if !self.root.is_dir() {
            return Ok(Vec::new());
        }
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let path = entry.map_err(io_err(&self.root))?.path();
            if path.join("meta.json").is_file() {
                if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                    ids.push(name.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Re-executes a stored point from its recorded configuration and appends
    /// the new record as the next replay.
    pub fn replay(
        &self,
        experiment_id: &str,
        point_id: &str,
        registry: &Registry,
        sensor: Option<&mut dyn PowerSensor>,
        options: &RunOptions,
    ) -> Result<ExperimentPoint, RepoError> {
        let original = self.load_point(experiment_id, point_id, None)?;
        let mut point = run_point(&original.config, registry, sensor, options)?;
        let stored = self.store_point(experiment_id, &point, true)?;
        point.replay = stored.replay;
        Ok(point)
    }
}
