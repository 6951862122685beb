//! Optional JSON configuration file. Every field is optional and command-line
//! flags take precedence.
//!
//! ```json
//! {
//!   "seed": 1, "alpha": 1.5, "beta": 0.5, "repetitions": 4, "epsilon": 0.1,
//!   "repo": "experiments", "dataset": "dataset",
//!   "orders": [64, 128, 256], "lws_orders": [128, 256], "totals": [16, 32],
//!   "sensor": {"kind": "mock", "channels": {"gpu": {"constant": 2.0}}}
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sensors::SensorConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub repetitions: Option<usize>,
    pub epsilon: Option<f64>,
    pub repo: Option<PathBuf>,
    /// Directory of kernel metadata files replacing the bundled registry.
    pub dataset: Option<PathBuf>,
    pub orders: Option<Vec<usize>>,
    pub lws_orders: Option<Vec<usize>>,
    pub totals: Option<Vec<usize>>,
    pub sensor: Option<SensorConfig>,
}

#[derive(Debug, thiserror::Error)]
pub enum SettingsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, SettingsError> {
        let text = fs::read_to_string(path).map_err(|source| SettingsError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| SettingsError::Parse { path: path.into(), source })
    }
}
