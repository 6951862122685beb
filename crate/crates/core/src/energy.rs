//! Power sensors and the two-point energy estimate.
//!
//! Energy over a measured region is approximated by averaging the power read
//! just before and just after the region and multiplying by its duration.
//! This is exact when power varies linearly over the region and is otherwise
//! only a crude trapezoid with one panel.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub channel: String,
    pub watts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub channel: String,
    pub joules: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnergyError {
    #[error("power samples come from different channels (`{start}` vs `{end}`)")]
    ChannelMismatch { start: String, end: String },
    #[error("elapsed time must be non-negative, got {0}")]
    NegativeElapsed(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensorError {
    #[error("sensor has no channel `{0}`")]
    UnsupportedChannel(String),
    #[error("reading channel `{channel}` failed: {reason}")]
    ProbeRead { channel: String, reason: String },
}

pub fn estimate_energy(
    start: &PowerSample,
    end: &PowerSample,
    elapsed_seconds: f64,
) -> Result<EnergyEstimate, EnergyError> {
    if start.channel != end.channel {
        return Err(EnergyError::ChannelMismatch { start: start.channel.clone(), end: end.channel.clone() });
    }
    if elapsed_seconds.is_nan() || elapsed_seconds < 0.0 {
        return Err(EnergyError::NegativeElapsed(elapsed_seconds));
    }
    Ok(EnergyEstimate { channel: start.channel.clone(), joules: (start.watts + end.watts) / 2.0 * elapsed_seconds })
}

/// A source of instantaneous power readings.
///
/// The harness reads every channel immediately before and after each timed
/// region, on the measuring thread.
pub trait PowerSensor {
    fn channels(&self) -> Vec<String>;
    fn read(&mut self, channel: &str) -> Result<PowerSample, SensorError>;
}

impl<S: PowerSensor + ?Sized> PowerSensor for &mut S {
    fn channels(&self) -> Vec<String> {
        (**self).channels()
    }

    fn read(&mut self, channel: &str) -> Result<PowerSample, SensorError> {
        (**self).read(channel)
    }
}

/// Sensor without any channels.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullSensor;

impl PowerSensor for NullSensor {
    fn channels(&self) -> Vec<String> {
        Vec::new()
    }

    fn read(&mut self, channel: &str) -> Result<PowerSample, SensorError> {
        Err(SensorError::UnsupportedChannel(channel.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockProfile {
    Constant(f64),
    /// Power rising (or falling) linearly from `start` to `end` across each
    /// measured region: reads alternate `start`, `end`, `start`, ...
    Linear {
        start: f64,
        end: f64,
    },
}

/// Deterministic sensor for tests and dry runs.
#[derive(Debug, Clone, Default)]
pub struct MockSensor {
    channels: BTreeMap<String, (MockProfile, bool)>,
}

impl MockSensor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_channel(mut self, channel: &str, profile: MockProfile) -> Self {
        self.channels.insert(channel.to_string(), (profile, false));
        self
    }

    pub fn constant(channel: &str, watts: f64) -> Self {
        Self::new().with_channel(channel, MockProfile::Constant(watts))
    }

    pub fn linear(channel: &str, start: f64, end: f64) -> Self {
        Self::new().with_channel(channel, MockProfile::Linear { start, end })
    }
}

impl PowerSensor for MockSensor {
    fn channels(&self) -> Vec<String> {
        self.channels.keys().cloned().collect()
    }

    fn read(&mut self, channel: &str) -> Result<PowerSample, SensorError> {
        let (profile, at_end) =
            self.channels.get_mut(channel).ok_or_else(|| SensorError::UnsupportedChannel(channel.to_string()))?;
        let watts = match *profile {
            MockProfile::Constant(w) => w,
            MockProfile::Linear { start, end } => {
                let w = if *at_end { end } else { start };
                *at_end = !*at_end;
                w
            }
        };
        Ok(PowerSample { channel: channel.to_string(), watts })
    }
}
