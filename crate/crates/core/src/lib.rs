//! Allocation-only building blocks for benchmarking dense GEMM,
//! `C = alpha * A x B + beta * C`, on square row-major matrices.
//!
//! Everything here is deterministic and free of IO: kernel metadata types,
//! seeded problem generation, the reference oracle, the block-dispatch kernel
//! variants, epsilon validation, throughput statistics, the two-point energy
//! estimator and tile-shape enumeration. Timing, files and the command line
//! live in the `gemmbench` crate.

#![no_std]
extern crate alloc;

pub mod config;
pub mod energy;
pub mod explore;
pub mod float_repr;
pub mod kernels;
pub mod matrix;
pub mod point;
pub mod problem;
pub mod reference;
pub mod spec;
pub mod stats;
pub mod validation;

pub use config::{LaunchConfig, TileShape};
pub use energy::{
    estimate_energy, EnergyError, EnergyEstimate, MockSensor, NullSensor, PowerSample, PowerSensor, SensorError,
};
pub use explore::{enumerate_tile_shapes, select_winner, ShapeHeuristic};
pub use kernels::{KernelError, KernelPlan, Variant};
pub use matrix::{Element, Matrix};
pub use point::{point_id, ExperimentPoint};
pub use problem::{generate_problem, ProblemInstance};
pub use reference::reference_gemm;
pub use spec::{Flavour, KernelSpec, Layout, Precision, Transpose};
pub use stats::{compute_stats, flops_for, gflops, StatsError, Summary};
pub use validation::{validate, ValidationError, ValidationReport};
