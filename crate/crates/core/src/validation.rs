//! Element-wise epsilon validation of a kernel result against the reference.

use serde::{Deserialize, Serialize};

use crate::matrix::{Element, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Largest `|result - reference|`; `+inf` if either side holds a non-finite value.
    #[serde(with = "crate::float_repr")]
    pub max_abs_diff: f64,
    pub epsilon: f64,
    #[serde(rename = "match")]
    pub matched: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("dimension mismatch: result is {result}x{result}, reference is {reference}x{reference}")]
    DimensionMismatch { result: usize, reference: usize },
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
}

/// Compares `result` against `reference` with an absolute `epsilon`.
///
/// Differences are taken in `f64` (exact for `f32` inputs) through the
/// floating-point absolute value, so sub-unit discrepancies are never
/// truncated away.
pub fn validate<T: Element>(
    result: &Matrix<T>,
    reference: &Matrix<T>,
    epsilon: f64,
) -> Result<ValidationReport, ValidationError> {
    if result.order() != reference.order() {
        return Err(ValidationError::DimensionMismatch { result: result.order(), reference: reference.order() });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ValidationError::InvalidEpsilon(epsilon));
    }
    let mut max_abs_diff = 0.0f64;
    for (&x, &y) in result.as_slice().iter().zip(reference.as_slice()) {
        let (x, y) = (x.to_f64(), y.to_f64());
        if !x.is_finite() || !y.is_finite() {
            max_abs_diff = f64::INFINITY;
            break;
        }
        let d = (x - y).abs();
        if d > max_abs_diff {
            max_abs_diff = d;
        }
    }
    Ok(ValidationReport { max_abs_diff, epsilon, matched: max_abs_diff <= epsilon })
}
