use alloc::format;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kernels::KernelError;
use crate::spec::KernelSpec;

pub const DEFAULT_ALPHA: f64 = 1.5;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPETITIONS: usize = 4;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TILE: TileShape = TileShape { s_j: 8, s_i: 8 };

/// Work-group shape: `s_j` work-items along columns, `s_i` along rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TileShape {
    pub s_j: usize,
    pub s_i: usize,
}

impl TileShape {
    pub fn new(s_j: usize, s_i: usize) -> Self {
        TileShape { s_j, s_i }
    }

    pub fn total(self) -> usize {
        self.s_j * self.s_i
    }
}

impl Default for TileShape {
    fn default() -> Self {
        DEFAULT_TILE
    }
}

/// Renders as `J,I`, the same form [`FromStr`] accepts.
impl fmt::Display for TileShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.s_j, self.s_i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expected two positive integers `J,I`, got `{0}`")]
pub struct TileParseError(pub alloc::string::String);

impl FromStr for TileShape {
    type Err = TileParseError;

    fn from_str(s: &str) -> Result<Self, TileParseError> {
        let err = || TileParseError(s.into());
        let (j, i) = s.split_once(',').ok_or_else(err)?;
        let parse = |x: &str| match x.trim().parse::<usize>() {
            Ok(v) if v >= 1 && !x.trim().starts_with('+') => Ok(v),
            _ => Err(err()),
        };
        Ok(TileShape { s_j: parse(j)?, s_i: parse(i)? })
    }
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// Everything needed to execute, identify and replay one experiment point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaunchConfig {
    pub kernel: KernelSpec,
    pub n: usize,
    pub tile: TileShape,
    pub repetitions: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Prepend one untimed run before the repetitions.
    #[serde(default)]
    pub warmup: bool,
}

impl LaunchConfig {
    pub fn new(kernel: KernelSpec, n: usize) -> Self {
        LaunchConfig {
            kernel,
            n,
            tile: DEFAULT_TILE,
            repetitions: DEFAULT_REPETITIONS,
            seed: DEFAULT_SEED,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            epsilon: DEFAULT_EPSILON,
            warmup: false,
        }
    }

    /// Checks the scalar settings and the work-group divisibility.
    pub fn check(&self) -> Result<(), KernelError> {
        self.check_settings()?;
        self.check_divisibility()
    }

    /// Checks everything except divisibility: positive block, order, tile,
    /// repetitions and epsilon.
    pub fn check_settings(&self) -> Result<(), KernelError> {
        let k = &self.kernel;
        if k.d_j == 0 || k.d_i == 0 {
            return Err(KernelError::Config(format!("kernel `{}` has an empty block", k.name)));
        }
        if self.n == 0 {
            return Err(KernelError::Config("matrix order must be positive".into()));
        }
        if self.tile.s_j == 0 || self.tile.s_i == 0 {
            return Err(KernelError::Config(format!("tile ({}) has a zero dimension", self.tile)));
        }
        if self.repetitions == 0 {
            return Err(KernelError::Config("repetitions must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(KernelError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(KernelError::Config("alpha and beta must be finite".into()));
        }
        Ok(())
    }

    /// The global work must split evenly into work-groups of coarsened blocks:
    /// `n % (d_j * s_j) == 0` and `n % (d_i * s_i) == 0`.
    pub fn check_divisibility(&self) -> Result<(), KernelError> {
        let cols = self.kernel.d_j * self.tile.s_j;
        let rows = self.kernel.d_i * self.tile.s_i;
        if cols == 0 || rows == 0 || !self.n.is_multiple_of(cols) || !self.n.is_multiple_of(rows) {
            return Err(KernelError::Config(format!(
                "order {} is not divisible by the work-group block {}x{} (d_j*s_j x d_i*s_i)",
                self.n, cols, rows
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{Precision, Transpose};
    use alloc::string::ToString;

    fn spec(d_j: usize) -> KernelSpec {
        KernelSpec {
            name: "K".into(),
            source_id: "K_4x1".into(),
            precision: Precision::S,
            trans_a: Transpose::N,
            trans_b: Transpose::T,
            d_j,
            d_i: 1,
        }
    }

    #[test]
    fn tile_parsing() {
        assert_eq!("4,16".parse::<TileShape>(), Ok(TileShape::new(4, 16)));
        assert_eq!(" 8, 8".parse::<TileShape>(), Ok(TileShape::new(8, 8)));
        for bad in ["4", "4,", ",4", "0,4", "4,-1", "4,16,2", "a,b", "+4,4", "4.0,4"] {
            assert!(bad.parse::<TileShape>().is_err(), "{bad}");
        }
        assert_eq!(TileShape::new(4, 16).to_string(), "4,16");
    }

    #[test]
    fn divisibility() {
        let mut c = LaunchConfig::new(spec(4), 100);
        assert!(matches!(c.check(), Err(KernelError::Config(_))));
        c.n = 128;
        assert!(c.check().is_ok());
        c.tile = TileShape::new(1, 3);
        assert!(c.check().is_err());
        c.tile = TileShape::new(1, 16);
        c.repetitions = 0;
        assert!(c.check().is_err());
    }
}
