//! Kernel metadata: precision, operand layouts and the coarsening block.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognised value `{0}`")]
pub struct ParseSpecError(pub String);

/// Element type of a kernel: single (`S`) or double (`D`) precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Precision {
    S,
    D,
}

impl Precision {
    pub fn code(self) -> char {
        match self {
            Precision::S => 'S',
            Precision::D => 'D',
        }
    }
}

impl FromStr for Precision {
    type Err = ParseSpecError;

    fn from_str(s: &str) -> Result<Self, ParseSpecError> {
        match s {
            "S" => Ok(Precision::S),
            "D" => Ok(Precision::D),
            _ => Err(ParseSpecError(s.into())),
        }
    }
}

/// Operand layout: normal (`N`) or transposed (`T`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Transpose {
    N,
    T,
}

impl Transpose {
    pub fn code(self) -> char {
        match self {
            Transpose::N => 'N',
            Transpose::T => 'T',
        }
    }
}

impl FromStr for Transpose {
    type Err = ParseSpecError;

    fn from_str(s: &str) -> Result<Self, ParseSpecError> {
        match s {
            "N" => Ok(Transpose::N),
            "T" => Ok(Transpose::T),
            _ => Err(ParseSpecError(s.into())),
        }
    }
}

/// Layout pair of the two operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout {
    pub trans_a: Transpose,
    pub trans_b: Transpose,
}

impl Layout {
    pub const NN: Layout = Layout { trans_a: Transpose::N, trans_b: Transpose::N };
    pub const NT: Layout = Layout { trans_a: Transpose::N, trans_b: Transpose::T };
    pub const TN: Layout = Layout { trans_a: Transpose::T, trans_b: Transpose::N };
    pub const TT: Layout = Layout { trans_a: Transpose::T, trans_b: Transpose::T };
}

/// A kernel family such as SGEMM NT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Flavour {
    pub precision: Precision,
    pub trans_a: Transpose,
    pub trans_b: Transpose,
}

impl Flavour {
    pub const SGEMM_NN: Flavour = Flavour::new(Precision::S, Transpose::N, Transpose::N);
    pub const SGEMM_NT: Flavour = Flavour::new(Precision::S, Transpose::N, Transpose::T);
    pub const DGEMM_NN: Flavour = Flavour::new(Precision::D, Transpose::N, Transpose::N);
    pub const DGEMM_NT: Flavour = Flavour::new(Precision::D, Transpose::N, Transpose::T);

    pub const fn new(precision: Precision, trans_a: Transpose, trans_b: Transpose) -> Self {
        Flavour { precision, trans_a, trans_b }
    }

    pub fn layout(self) -> Layout {
        Layout { trans_a: self.trans_a, trans_b: self.trans_b }
    }
}

/// Renders as `SGEMM_NT`.
impl fmt::Display for Flavour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}GEMM_{}{}", self.precision.code(), self.trans_a.code(), self.trans_b.code())
    }
}

/// Accepts `SGEMM_NT`, `SGEMM-NT` or `sgemm nt`.
impl FromStr for Flavour {
    type Err = ParseSpecError;

    fn from_str(s: &str) -> Result<Self, ParseSpecError> {
        let b = s.as_bytes();
        if b.len() != 8 || !b[1..5].eq_ignore_ascii_case(b"GEMM") || !matches!(b[5], b'_' | b'-' | b' ') {
            return Err(ParseSpecError(s.into()));
        }
        let trans = |c: u8| match c.to_ascii_uppercase() {
            b'N' => Ok(Transpose::N),
            b'T' => Ok(Transpose::T),
            _ => Err(ParseSpecError(s.into())),
        };
        let precision = match b[0].to_ascii_uppercase() {
            b'S' => Precision::S,
            b'D' => Precision::D,
            _ => return Err(ParseSpecError(s.into())),
        };
        Ok(Flavour { precision, trans_a: trans(b[6])?, trans_b: trans(b[7])? })
    }
}

/// Metadata describing one kernel variant.
///
/// `source_id` carries the `file` key of the metadata JSON. It no longer
/// names a source file to compile; it selects the native implementation
/// (see [`crate::kernels::Variant::from_key`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub name: String,
    #[serde(rename = "file")]
    pub source_id: String,
    #[serde(rename = "type")]
    pub precision: Precision,
    #[serde(rename = "transA")]
    pub trans_a: Transpose,
    #[serde(rename = "transB")]
    pub trans_b: Transpose,
    /// Columns of C computed by one work-item.
    #[serde(rename = "dj")]
    pub d_j: usize,
    /// Rows of C computed by one work-item.
    #[serde(rename = "di")]
    pub d_i: usize,
}

impl KernelSpec {
    pub fn flavour(&self) -> Flavour {
        Flavour::new(self.precision, self.trans_a, self.trans_b)
    }

    pub fn layout(&self) -> Layout {
        self.flavour().layout()
    }
}
