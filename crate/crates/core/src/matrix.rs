use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Mul};

use crate::spec::Precision;

/// Floating-point element type a kernel can run on.
pub trait Element:
    Copy + Debug + Default + PartialEq + Send + Sync + Add<Output = Self> + Mul<Output = Self> + 'static
{
    const PRECISION: Precision;
    const ZERO: Self;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    /// Raw bit pattern widened to 64 bits, used for digests and bit-exact comparisons.
    fn to_bits_u64(self) -> u64;
    /// Maps 64 random bits onto a grid over `[-0.5, 0.5)` that is exact in
    /// this precision. Returns `None` for the single draw landing on `-0.5`,
    /// which callers reject to keep the open interval.
    fn centred_unit(bits: u64) -> Option<Self>;
}

impl Element for f32 {
    const PRECISION: Precision = Precision::S;
    const ZERO: Self = 0.0;

    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn to_bits_u64(self) -> u64 {
        self.to_bits() as u64
    }

    fn centred_unit(bits: u64) -> Option<Self> {
        let m = (bits >> 40) as i32;
        (m != 0).then(|| (m - (1 << 23)) as f32 * (1.0 / (1u32 << 24) as f32))
    }
}

impl Element for f64 {
    const PRECISION: Precision = Precision::D;
    const ZERO: Self = 0.0;

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn to_bits_u64(self) -> u64 {
        self.to_bits()
    }

    fn centred_unit(bits: u64) -> Option<Self> {
        let m = (bits >> 11) as i64;
        (m != 0).then(|| (m - (1 << 52)) as f64 * (1.0 / (1u64 << 53) as f64))
    }
}

/// Dense `n x n` matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Element> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::ZERO; n * n] }
    }

    /// Returns `None` unless `data.len() == n * n`.
    pub fn from_vec(n: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == n * n).then_some(Matrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::from_f64(1.0);
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    /// Element-wise bit equality; unlike `==` this distinguishes `-0.0` and compares NaNs.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.n == other.n && self.data.iter().zip(&other.data).all(|(x, y)| x.to_bits_u64() == y.to_bits_u64())
    }
}
