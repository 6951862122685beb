//! Native GEMM kernel variants under a block-dispatch execution model.
//!
//! The global range has `n / d_j` work-items along columns (`j`) and
//! `n / d_i` along rows (`i`). Work-items are grouped into work-groups of
//! `s_j x s_i`; work-item `(j, i)` owns the `d_i x d_j` block of C starting
//! at row `i * d_i`, column `j * d_j`.
//!
//! Work-groups sharing a row of groups form a *band*: `s_i * d_i` complete
//! rows of C, contiguous in row-major storage. Bands are independent, so a
//! caller can hand disjoint band slices to different threads
//! ([`KernelPlan::compute_band`]); [`KernelPlan::execute`] runs them in order.
//!
//! Every variant accumulates each element of `A' x B'` from zero with `k`
//! ascending and applies `alpha * acc + beta * c` once, so all variants and
//! every valid tile shape produce bit-identical results, equal to
//! [`crate::reference_gemm`].

use alloc::format;
use alloc::string::String;
use alloc::vec;

use crate::config::{LaunchConfig, TileShape};
use crate::matrix::{Element, Matrix};
use crate::problem::ProblemInstance;
use crate::spec::{KernelSpec, Precision, Transpose};

/// Depth of one staged `k` tile in the tiled variant.
pub const DEFAULT_TILE_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("invalid launch configuration: {0}")]
    Config(String),
    #[error("unknown kernel variant `{0}`")]
    UnknownVariant(String),
}

/// Native implementation selected by a kernel's variant key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Every element of a work-item's block is a full, independent dot
    /// product, as in the one-element-per-work-item kernel.
    Naive,
    /// One pass over `k` updates all `d_j * d_i` accumulators of the block.
    Coarsened,
    /// Operand sub-blocks for the whole work-group are staged into scratch
    /// buffers one `k` tile at a time before the work-items consume them.
    Tiled,
}

impl Variant {
    /// Parses a variant key such as `SGEMM_NT_4x1_barrier.cl`.
    ///
    /// An optional `.cl` extension is ignored. A trailing `_barrier` selects
    /// [`Variant::Tiled`]; otherwise the last `_`-separated segment must be a
    /// block `<dj>x<di>`: `1x1` is [`Variant::Naive`], anything else
    /// [`Variant::Coarsened`].
    pub fn from_key(key: &str) -> Option<Variant> {
        let stem = key.strip_suffix(".cl").unwrap_or(key);
        if let Some(rest) = stem.strip_suffix("_barrier") {
            return is_block(rest.rsplit('_').next()?).then_some(Variant::Tiled);
        }
        let last = stem.rsplit('_').next()?;
        if !is_block(last) {
            return None;
        }
        Some(if last == "1x1" { Variant::Naive } else { Variant::Coarsened })
    }
}

fn is_block(s: &str) -> bool {
    let digits = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit());
    matches!(s.split_once('x'), Some((j, i)) if digits(j) && digits(i))
}

/// Element-offset strides for reading `A'(i, k)` and `B'(k, j)` out of
/// row-major storage.
#[derive(Debug, Clone, Copy)]
struct Strides {
    a_row: usize,
    a_k: usize,
    b_k: usize,
    b_col: usize,
}

impl Strides {
    fn new(n: usize, trans_a: Transpose, trans_b: Transpose) -> Self {
        let (a_row, a_k) = match trans_a {
            Transpose::N => (n, 1),
            Transpose::T => (1, n),
        };
        let (b_k, b_col) = match trans_b {
            Transpose::N => (n, 1),
            Transpose::T => (1, n),
        };
        Strides { a_row, a_k, b_k, b_col }
    }
}

#[inline(always)]
fn epilogue<T: Element>(alpha: T, acc: T, beta: T, c: T) -> T {
    alpha * acc + beta * c
}

/// A validated kernel launch over borrowed operands.
#[derive(Debug, Clone)]
pub struct KernelPlan<'a, T> {
    variant: Variant,
    n: usize,
    d_j: usize,
    d_i: usize,
    tile: TileShape,
    tile_depth: usize,
    strides: Strides,
    a: &'a [T],
    b: &'a [T],
    alpha: T,
    beta: T,
}

impl<'a, T: Element> KernelPlan<'a, T> {
    pub fn new(spec: &KernelSpec, config: &LaunchConfig, problem: &'a ProblemInstance<T>) -> Result<Self, KernelError> {
        let variant =
            Variant::from_key(&spec.source_id).ok_or_else(|| KernelError::UnknownVariant(spec.source_id.clone()))?;
        if spec.precision != T::PRECISION {
            return Err(KernelError::Config(format!(
                "kernel `{}` is {}GEMM but the problem is {}GEMM",
                spec.name,
                spec.precision.code(),
                T::PRECISION.code()
            )));
        }
        let mut cfg = config.clone();
        cfg.kernel.d_j = spec.d_j;
        cfg.kernel.d_i = spec.d_i;
        cfg.check()?;
        if problem.n != config.n {
            return Err(KernelError::Config(format!(
                "launch order {} does not match problem order {}",
                config.n, problem.n
            )));
        }
        Ok(KernelPlan {
            variant,
            n: config.n,
            d_j: spec.d_j,
            d_i: spec.d_i,
            tile: config.tile,
            tile_depth: DEFAULT_TILE_DEPTH,
            strides: Strides::new(config.n, spec.trans_a, spec.trans_b),
            a: problem.a.as_slice(),
            b: problem.b.as_slice(),
            alpha: problem.alpha,
            beta: problem.beta,
        })
    }

    /// Overrides the staged `k` depth of the tiled variant (clamped to at least 1).
    pub fn with_tile_depth(mut self, depth: usize) -> Self {
        self.tile_depth = depth.max(1);
        self
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    /// Number of elements in one band slice.
    pub fn band_len(&self) -> usize {
        self.tile.s_i * self.d_i * self.n
    }

    pub fn band_count(&self) -> usize {
        self.n / (self.tile.s_i * self.d_i)
    }

    /// Runs every band in order over `c`, which must hold the starting C.
    pub fn execute(&self, c: &mut Matrix<T>) {
        assert_eq!(c.order(), self.n, "output order");
        let len = self.band_len();
        for (band, rows) in c.as_mut_slice().chunks_mut(len).enumerate() {
            self.compute_band(band, rows);
        }
    }

    /// Copies the problem's starting C and executes into it.
    pub fn run(&self, problem: &ProblemInstance<T>) -> Matrix<T> {
        let mut c = problem.c_initial.clone();
        self.execute(&mut c);
        c
    }

    /// Computes all work-groups of band `band`. `rows` is the band's slice of
    /// C (`band_len()` elements) and holds the starting values on entry.
    pub fn compute_band(&self, band: usize, rows: &mut [T]) {
        assert_eq!(rows.len(), self.band_len(), "band slice length");
        match self.variant {
            Variant::Naive => self.band_naive(band, rows),
            Variant::Coarsened => self.band_coarsened(band, rows),
            Variant::Tiled => self.band_tiled(band, rows),
        }
    }

    fn groups_j(&self) -> usize {
        self.n / (self.tile.s_j * self.d_j)
    }

    #[inline(always)]
    fn a_at(&self, i: usize, k: usize) -> T {
        self.a[i * self.strides.a_row + k * self.strides.a_k]
    }

    #[inline(always)]
    fn b_at(&self, k: usize, j: usize) -> T {
        self.b[k * self.strides.b_k + j * self.strides.b_col]
    }

    /// Visits every work-item of the band in dispatch order as
    /// `(first row within band, first global column)`.
    fn for_each_work_item(&self, mut f: impl FnMut(usize, usize)) {
        for gj in 0..self.groups_j() {
            for li in 0..self.tile.s_i {
                for lj in 0..self.tile.s_j {
                    let wj = gj * self.tile.s_j + lj;
                    f(li * self.d_i, wj * self.d_j);
                }
            }
        }
    }

    fn band_naive(&self, band: usize, rows: &mut [T]) {
        let n = self.n;
        let row0 = band * self.tile.s_i * self.d_i;
        self.for_each_work_item(|r0, j0| {
            for bi in 0..self.d_i {
                let i = row0 + r0 + bi;
                for bj in 0..self.d_j {
                    let j = j0 + bj;
                    let mut acc = T::ZERO;
                    for k in 0..n {
                        acc = acc + self.a_at(i, k) * self.b_at(k, j);
                    }
                    let c = &mut rows[(r0 + bi) * n + j];
                    *c = epilogue(self.alpha, acc, self.beta, *c);
                }
            }
        });
    }

    fn band_coarsened(&self, band: usize, rows: &mut [T]) {
        let n = self.n;
        let (d_j, d_i) = (self.d_j, self.d_i);
        let row0 = band * self.tile.s_i * d_i;
        let mut acc = vec![T::ZERO; d_j * d_i];
        self.for_each_work_item(|r0, j0| {
            acc.fill(T::ZERO);
            for k in 0..n {
                for bi in 0..d_i {
                    let a = self.a_at(row0 + r0 + bi, k);
                    let lane = &mut acc[bi * d_j..(bi + 1) * d_j];
                    for (bj, s) in lane.iter_mut().enumerate() {
                        *s = *s + a * self.b_at(k, j0 + bj);
                    }
                }
            }
            for bi in 0..d_i {
                for bj in 0..d_j {
                    let c = &mut rows[(r0 + bi) * n + j0 + bj];
                    *c = epilogue(self.alpha, acc[bi * d_j + bj], self.beta, *c);
                }
            }
        });
    }

    fn band_tiled(&self, band: usize, rows: &mut [T]) {
        let n = self.n;
        let (d_j, d_i) = (self.d_j, self.d_i);
        let (s_j, s_i) = (self.tile.s_j, self.tile.s_i);
        let group_rows = s_i * d_i;
        let group_cols = s_j * d_j;
        let depth = self.tile_depth;
        let row0 = band * group_rows;

        // Scratch is laid out [row][kk] for A' and [col][kk] for B', so the
        // inner accumulation reads both contiguously.
        let mut stage_a = vec![T::ZERO; group_rows * depth];
        let mut stage_b = vec![T::ZERO; group_cols * depth];
        let mut acc = vec![T::ZERO; group_rows * group_cols];

        for gj in 0..self.groups_j() {
            let col0 = gj * group_cols;
            acc.fill(T::ZERO);
            let mut k0 = 0;
            while k0 < n {
                let kd = depth.min(n - k0);
                for r in 0..group_rows {
                    for kk in 0..kd {
                        stage_a[r * depth + kk] = self.a_at(row0 + r, k0 + kk);
                    }
                }
                for c in 0..group_cols {
                    for kk in 0..kd {
                        stage_b[c * depth + kk] = self.b_at(k0 + kk, col0 + c);
                    }
                }
                // Barrier: the stage is complete before any work-item reads it.
                for li in 0..s_i {
                    for lj in 0..s_j {
                        for bi in 0..d_i {
                            let r = li * d_i + bi;
                            let a_row = &stage_a[r * depth..r * depth + kd];
                            for bj in 0..d_j {
                                let c = lj * d_j + bj;
                                let b_col = &stage_b[c * depth..c * depth + kd];
                                let slot = &mut acc[r * group_cols + c];
                                let mut s = *slot;
                                for (&x, &y) in a_row.iter().zip(b_col) {
                                    s = s + x * y;
                                }
                                *slot = s;
                            }
                        }
                    }
                }
                k0 += kd;
            }
            for r in 0..group_rows {
                for c in 0..group_cols {
                    let out = &mut rows[r * n + col0 + c];
                    *out = epilogue(self.alpha, acc[r * group_cols + c], self.beta, *out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate_problem;
    use crate::reference::reference_gemm;
    use crate::spec::Layout;

    fn spec(key: &str, d_j: usize, d_i: usize, precision: Precision) -> KernelSpec {
        KernelSpec {
            name: key.into(),
            source_id: key.into(),
            precision,
            trans_a: Transpose::N,
            trans_b: Transpose::T,
            d_j,
            d_i,
        }
    }

    #[test]
    fn variant_keys() {
        assert_eq!(Variant::from_key("SGEMM_NT_1x1.cl"), Some(Variant::Naive));
        assert_eq!(Variant::from_key("SGEMM_NT_4x1.cl"), Some(Variant::Coarsened));
        assert_eq!(Variant::from_key("DGEMM_NN_4x1_barrier"), Some(Variant::Tiled));
        assert_eq!(Variant::from_key("x_2x2"), Some(Variant::Coarsened));
        assert_eq!(Variant::from_key("gemm.cl"), None);
        assert_eq!(Variant::from_key("SGEMM_NT_barrier"), None);
        assert_eq!(Variant::from_key("SGEMM_NT_4xq"), None);
        assert_eq!(Variant::from_key(""), None);
    }

    #[test]
    fn unknown_variant_is_reported() {
        let p = generate_problem::<f32>(8, 0, 1.0, 0.0);
        let s = spec("mystery.cl", 1, 1, Precision::S);
        let cfg = LaunchConfig::new(s.clone(), 8);
        assert_eq!(KernelPlan::new(&s, &cfg, &p).unwrap_err(), KernelError::UnknownVariant("mystery.cl".into()));
    }

    #[test]
    fn precision_and_order_mismatch() {
        let p = generate_problem::<f64>(8, 0, 1.0, 0.0);
        let s = spec("SGEMM_NT_1x1", 1, 1, Precision::S);
        let cfg = LaunchConfig::new(s.clone(), 8);
        assert!(matches!(KernelPlan::new(&s, &cfg, &p), Err(KernelError::Config(_))));
        let s = spec("DGEMM_NT_1x1", 1, 1, Precision::D);
        let cfg = LaunchConfig::new(s.clone(), 16);
        assert!(matches!(KernelPlan::new(&s, &cfg, &p), Err(KernelError::Config(_))));
    }

    #[test]
    fn divisibility_is_enforced() {
        let p = generate_problem::<f32>(8, 0, 1.0, 0.0);
        let s = spec("SGEMM_NT_4x1", 4, 1, Precision::S);
        let cfg = LaunchConfig::new(s.clone(), 8);
        // default tile (8,8) needs n divisible by 32
        assert!(matches!(KernelPlan::new(&s, &cfg, &p), Err(KernelError::Config(_))));
    }

    #[test]
    fn variants_match_reference_bitwise() {
        let p = generate_problem::<f32>(16, 3, 1.5, 0.5);
        let expected = reference_gemm(&p, Layout::NT);
        for (key, d_j) in [("SGEMM_NT_1x1", 1), ("SGEMM_NT_4x1", 4), ("SGEMM_NT_4x1_barrier", 4)] {
            let s = spec(key, d_j, 1, Precision::S);
            let mut cfg = LaunchConfig::new(s.clone(), 16);
            cfg.tile = TileShape::new(2, 4);
            let plan = KernelPlan::new(&s, &cfg, &p).unwrap();
            assert!(plan.run(&p).bit_eq(&expected), "{key}");
        }
    }

    #[test]
    fn tiled_handles_partial_k_tile() {
        let p = generate_problem::<f64>(12, 8, 1.5, 0.5);
        let s = spec("DGEMM_NT_4x1_barrier", 4, 1, Precision::D);
        let mut cfg = LaunchConfig::new(s.clone(), 12);
        cfg.tile = TileShape::new(3, 2);
        let plan = KernelPlan::new(&s, &cfg, &p).unwrap().with_tile_depth(5);
        assert!(plan.run(&p).bit_eq(&reference_gemm(&p, Layout::NT)));
    }

    #[test]
    fn two_dimensional_blocks() {
        let p = generate_problem::<f64>(12, 2, 1.5, 0.5);
        let expected = reference_gemm(&p, Layout::NT);
        for key in ["DGEMM_NT_2x3", "DGEMM_NT_2x3_barrier", "DGEMM_NT_1x1"] {
            let s = spec(key, 2, 3, Precision::D);
            let mut cfg = LaunchConfig::new(s.clone(), 12);
            cfg.tile = TileShape::new(3, 2);
            let plan = KernelPlan::new(&s, &cfg, &p).unwrap();
            assert_eq!(plan.band_count(), 2);
            assert!(plan.run(&p).bit_eq(&expected), "{key}");
        }
    }
}
