//! Seeded GEMM problem instances.
//!
//! Elements are drawn i.i.d. uniform over `(-0.5, +0.5)` from ChaCha8
//! (`rand_chacha::ChaCha8Rng`, seeded with `seed_from_u64`), whose output
//! stream is fixed across platforms. A, B and C are filled in that order,
//! each row-major, one 64-bit draw per element.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matrix::{Element, Matrix};

/// One GEMM problem: `C = alpha * A' x B' + beta * C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    pub n: usize,
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    /// Starting C; every repetition begins from a copy of this.
    pub c_initial: Matrix<T>,
    pub alpha: T,
    pub beta: T,
    pub seed: u64,
}

pub fn generate_problem<T: Element>(n: usize, seed: u64, alpha: f64, beta: f64) -> ProblemInstance<T> {
    assert!(n >= 1, "matrix order must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fill = || {
        let data: Vec<T> = (0..n * n)
            .map(|_| loop {
                if let Some(v) = T::centred_unit(rng.next_u64()) {
                    break v;
                }
            })
            .collect();
        Matrix::from_vec(n, data).expect("n * n elements")
    };
    let a = fill();
    let b = fill();
    let c_initial = fill();
    ProblemInstance { n, a, b, c_initial, alpha: T::from_f64(alpha), beta: T::from_f64(beta), seed }
}
