//! Experiment point records and their stable identifiers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::LaunchConfig;
use crate::energy::EnergyEstimate;
use crate::matrix::{Element, Matrix};
use crate::validation::ValidationReport;

/// One fully specified configuration plus its measured repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPoint {
    pub point_id: String,
    /// Replay counter: `None` for an original run, `Some(k)` for the k-th replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<u32>,
    pub config: LaunchConfig,
    /// Why the point was not executed (e.g. a divisibility violation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub elapsed_seconds: Vec<f64>,
    pub gflops_per_rep: Vec<f64>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub validations: Vec<ValidationReport>,
    /// Per repetition, one estimate per sensor channel that could be read.
    pub energy: Vec<Vec<EnergyEstimate>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sensor_errors: Vec<String>,
    /// Digest of the generated A, B and starting C.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem_digest: Option<String>,
    /// Digest of the first repetition's result matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_digest: Option<String>,
    #[serde(default)]
    pub environment: BTreeMap<String, String>,
}

impl ExperimentPoint {
    /// Record for a configuration that was not run.
    pub fn skipped(config: LaunchConfig, reason: String) -> Self {
        ExperimentPoint {
            point_id: point_id(&config),
            replay: None,
            config,
            skipped: Some(reason),
            elapsed_seconds: Vec::new(),
            gflops_per_rep: Vec::new(),
            mean: None,
            std: None,
            validations: Vec::new(),
            energy: Vec::new(),
            sensor_errors: Vec::new(),
            problem_digest: None,
            result_digest: None,
            environment: BTreeMap::new(),
        }
    }

    pub fn all_matched(&self) -> bool {
        self.validations.iter().all(|v| v.matched)
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Canonical text a point id is derived from. Scalars are written as their
/// IEEE bit patterns so the id never depends on decimal formatting.
pub fn canonical_config(config: &LaunchConfig) -> String {
    format!(
        "kernel={};precision={};n={};lws={},{};seed={};alpha={:016x};beta={:016x};reps={}",
        config.kernel.name,
        config.kernel.precision.code(),
        config.n,
        config.tile.s_j,
        config.tile.s_i,
        config.seed,
        config.alpha.to_bits(),
        config.beta.to_bits(),
        config.repetitions,
    )
}

/// 16 hex digits of SHA-256 over [`canonical_config`].
pub fn point_id(config: &LaunchConfig) -> String {
    let digest = Sha256::digest(canonical_config(config).as_bytes());
    hex(&digest[..8])
}

/// SHA-256 over the order and element bit patterns of `matrices`, as hex.
pub fn matrix_digest<T: Element>(matrices: &[&Matrix<T>]) -> String {
    let mut h = Sha256::new();
    for m in matrices {
        h.update((m.order() as u64).to_le_bytes());
        for x in m.as_slice() {
            h.update(x.to_bits_u64().to_le_bytes());
        }
    }
    hex(&h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TileShape;
    use crate::spec::{KernelSpec, Precision, Transpose};

    fn config() -> LaunchConfig {
        LaunchConfig::new(
            KernelSpec {
                name: "SGEMM_NT_1x1".into(),
                source_id: "SGEMM_NT_1x1.cl".into(),
                precision: Precision::S,
                trans_a: Transpose::N,
                trans_b: Transpose::T,
                d_j: 1,
                d_i: 1,
            },
            64,
        )
    }

    #[test]
    fn id_is_stable_and_sensitive() {
        let c = config();
        let id = point_id(&c);
        assert_eq!(id.len(), 16);
        assert!(id.bytes().all(|b| b.is_ascii_hexdigit()));
        assert_eq!(id, point_id(&c.clone()));
        assert_eq!(id, FROZEN_ID);

        let mut other = c.clone();
        other.tile = TileShape::new(4, 16);
        assert_ne!(point_id(&other), id);
        let mut other = c.clone();
        other.alpha = 1.0;
        assert_ne!(point_id(&other), id);
        // Not part of the identity.
        let mut other = c;
        other.epsilon = 0.2;
        other.warmup = true;
        assert_eq!(point_id(&other), id);
    }

    const FROZEN_ID: &str = "66b3c353284677cd";

    #[test]
    fn json_round_trip() {
        let mut p = ExperimentPoint::skipped(config(), "divisibility".into());
        p.elapsed_seconds = alloc::vec![0.1 + 0.2, 1e-9];
        p.gflops_per_rep = alloc::vec![2.954, 1.0 / 3.0];
        p.mean = Some(core::f64::consts::PI);
        p.validations.push(ValidationReport { max_abs_diff: f64::INFINITY, epsilon: 0.1, matched: false });
        p.energy.push(alloc::vec![EnergyEstimate { channel: "gpu".into(), joules: 0.000171 }]);
        p.environment.insert("os".into(), "linux".into());
        let text = serde_json::to_string(&p).unwrap();
        let back: ExperimentPoint = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
