//! Sensor implementations needing the filesystem, and the sensor section of
//! the run configuration.
//!
//! ```json
//! {"kind": "file", "path_template": "/sys/sensors/{channel}/power", "scale": 1e-6,
//!  "channels": {"gpu": {}, "memory": {"path": "/sys/mem_power", "scale": 1.0}}}
//! {"kind": "mock", "channels": {"gpu": {"constant": 2.0}, "memory": {"linear": {"start": 1.0, "end": 3.0}}}}
//! {"kind": "null"}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use gemmbench_core::energy::MockProfile;
use gemmbench_core::{MockSensor, NullSensor, PowerSample, PowerSensor, SensorError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
struct Probe {
    path: PathBuf,
    scale: f64,
}

/// Reads a decimal power value from one file per channel and multiplies it
/// by the channel's scale (e.g. `1e-6` for microwatt readings).
#[derive(Debug, Clone, Default)]
pub struct FileProbeSensor {
    probes: BTreeMap<String, Probe>,
}

impl FileProbeSensor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_probe(mut self, channel: &str, path: impl Into<PathBuf>, scale: f64) -> Self {
        self.probes.insert(channel.to_string(), Probe { path: path.into(), scale });
        self
    }
}

impl PowerSensor for FileProbeSensor {
    fn channels(&self) -> Vec<String> {
        self.probes.keys().cloned().collect()
    }

    fn read(&mut self, channel: &str) -> Result<PowerSample, SensorError> {
        let probe = self.probes.get(channel).ok_or_else(|| SensorError::UnsupportedChannel(channel.to_string()))?;
        let fail = |reason: String| SensorError::ProbeRead { channel: channel.to_string(), reason };
        let text = fs::read_to_string(&probe.path).map_err(|e| fail(format!("{}: {e}", probe.path.display())))?;
        let raw: f64 = text
            .trim()
            .parse()
            .map_err(|_| fail(format!("{}: not a number: {:?}", probe.path.display(), text.trim())))?;
        let watts = raw * probe.scale;
        if !watts.is_finite() || watts < 0.0 {
            return Err(fail(format!("negative or non-finite power {watts} W")));
        }
        Ok(PowerSample { channel: channel.to_string(), watts })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub scale: Option<f64>,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorConfig {
    Null,
    Mock {
        channels: BTreeMap<String, MockProfile>,
    },
    File {
        /// Path with `{channel}` replaced by the channel name; used for
        /// channels without their own `path`.
        #[serde(default)]
        path_template: Option<String>,
        #[serde(default = "default_scale")]
        scale: f64,
        channels: BTreeMap<String, ProbeConfig>,
    },
}

#[derive(Debug, thiserror::Error)]
#[error("sensor configuration: {0}")]
pub struct SensorConfigError(pub String);

impl SensorConfig {
    pub fn build(&self) -> Result<Box<dyn PowerSensor + Send>, SensorConfigError> {
        Ok(match self {
            SensorConfig::Null => Box::new(NullSensor),
            SensorConfig::Mock { channels } => {
                let mut s = MockSensor::new();
                for (name, profile) in channels {
                    s = s.with_channel(name, *profile);
                }
                Box::new(s)
            }
            SensorConfig::File { path_template, scale, channels } => {
                let mut s = FileProbeSensor::new();
                for (name, probe) in channels {
                    let path = match (&probe.path, path_template) {
                        (Some(p), _) => p.clone(),
                        (None, Some(t)) => PathBuf::from(t.replace("{channel}", name)),
                        (None, None) => {
                            return Err(SensorConfigError(format!(
                                "channel `{name}` has no path and there is no path_template"
                            )))
                        }
                    };
                    s = s.with_probe(name, path, probe.scale.unwrap_or(*scale));
                }
                Box::new(s)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_probe_reads_and_scales() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("gpu"), "2500000\n").unwrap();
        fs::write(dir.path().join("memory"), "garbage").unwrap();
        let cfg: SensorConfig = serde_json::from_str(&format!(
            r#"{{"kind":"file","path_template":"{}/{{channel}}","scale":1e-6,
                "channels":{{"gpu":{{}},"memory":{{}},"cpu":{{"path":"{}/absent"}}}}}}"#,
            dir.path().display(),
            dir.path().display()
        ))
        .unwrap();
        let mut s = cfg.build().unwrap();
        assert_eq!(s.channels(), ["cpu", "gpu", "memory"]);
        assert_eq!(s.read("gpu").unwrap().watts, 2.5);
        assert!(matches!(s.read("memory"), Err(SensorError::ProbeRead { .. })));
        assert!(matches!(s.read("cpu"), Err(SensorError::ProbeRead { .. })));
        assert!(matches!(s.read("dsp"), Err(SensorError::UnsupportedChannel(_))));
    }

    #[test]
    fn mock_and_null_configs() {
        let cfg: SensorConfig = serde_json::from_str(
            r#"{"kind":"mock","channels":{"gpu":{"constant":2.0},"memory":{"linear":{"start":1.0,"end":3.0}}}}"#,
        )
        .unwrap();
        let mut s = cfg.build().unwrap();
        assert_eq!(s.read("gpu").unwrap().watts, 2.0);
        assert_eq!(s.read("memory").unwrap().watts, 1.0);
        assert_eq!(s.read("memory").unwrap().watts, 3.0);
        let null: SensorConfig = serde_json::from_str(r#"{"kind":"null"}"#).unwrap();
        assert!(null.build().unwrap().channels().is_empty());
    }

    #[test]
    fn missing_path_is_an_error() {
        let cfg: SensorConfig = serde_json::from_str(r#"{"kind":"file","channels":{"gpu":{}}}"#).unwrap();
        assert!(cfg.build().is_err());
    }
}
