//! Shared test helpers: an independent GEMM oracle and fixture loaders.
#![allow(dead_code)]

use std::path::PathBuf;

use gemmbench::core::{
    compute_stats, Element, EnergyEstimate, ExperimentPoint, LaunchConfig, Layout, ProblemInstance, Transpose,
    ValidationReport,
};
use gemmbench::Registry;

/// `alpha * op(A) * op(B) + beta * C` in f64: transposes are materialised
/// first, then an `(i, j, k)` triple loop.
pub fn oracle_gemm<T: Element>(p: &ProblemInstance<T>, layout: Layout) -> Vec<f64> {
    let n = p.n;
    let load = |m: &[T], t: Transpose| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = match t {
                    Transpose::N => m[r * n + c].to_f64(),
                    Transpose::T => m[c * n + r].to_f64(),
                };
            }
        }
        out
    };
    let a = load(p.a.as_slice(), layout.trans_a);
    let b = load(p.b.as_slice(), layout.trans_b);
    let (alpha, beta) = (p.alpha.to_f64(), p.beta.to_f64());
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut sum = 0.0;
            for k in 0..n {
                sum += a[i * n + k] * b[k * n + j];
            }
            c[i * n + j] = alpha * sum + beta * p.c_initial.as_slice()[i * n + j].to_f64();
        }
    }
    c
}

pub fn max_abs_diff<T: Element>(got: &[T], want: &[f64]) -> f64 {
    got.iter().zip(want).map(|(g, w)| (g.to_f64() - w).abs()).fold(0.0, f64::max)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(fixture(name)).unwrap();
    r.records().map(Result::unwrap).collect()
}

fn f(rec: &csv::StringRecord, i: usize) -> f64 {
    rec[i].parse().unwrap()
}

fn u(rec: &csv::StringRecord, i: usize) -> usize {
    rec[i].parse().unwrap()
}

fn blank_point(kernel: &str, n: usize) -> ExperimentPoint {
    let spec = Registry::bundled().get(kernel).unwrap().clone();
    let mut p = ExperimentPoint::skipped(LaunchConfig::new(spec, n), String::new());
    p.skipped = None;
    p
}

/// Points carrying the printed per-run throughput of the order sweep, with
/// statistics recomputed from the raw values.
pub fn table2_points() -> Vec<ExperimentPoint> {
    read_fixture("table2.csv")
        .iter()
        .map(|rec| {
            let mut p = blank_point(&rec[0], u(rec, 1));
            p.gflops_per_rep = (2..6).map(|i| f(rec, i)).collect();
            let s = compute_stats(&p.gflops_per_rep).unwrap();
            p.mean = Some(s.mean);
            p.std = s.std;
            p
        })
        .collect()
}

/// One point per kernel and order with a single repetition holding the
/// printed GPU and memory energies.
pub fn table4_points() -> Vec<ExperimentPoint> {
    let kernels = ["SGEMM_NT_1x1", "SGEMM_NT_4x1", "SGEMM_NT_4x1_barrier"];
    let mut out = Vec::new();
    for rec in read_fixture("table4.csv") {
        for (k, name) in kernels.iter().enumerate() {
            let mut p = blank_point(name, u(&rec, 0));
            p.energy = vec![vec![
                EnergyEstimate { channel: "gpu".into(), joules: f(&rec, 1 + 2 * k) },
                EnergyEstimate { channel: "memory".into(), joules: f(&rec, 2 + 2 * k) },
            ]];
            out.push(p);
        }
    }
    out
}

/// Points carrying the printed per-run validation outcome.
pub fn table5_points() -> Vec<ExperimentPoint> {
    read_fixture("table5.csv")
        .iter()
        .map(|rec| {
            let mut p = blank_point(&rec[0], u(rec, 1));
            p.validations = (0..4)
                .map(|r| ValidationReport {
                    max_abs_diff: f(rec, 2 + 2 * r),
                    epsilon: 0.1,
                    matched: &rec[3 + 2 * r] == "1",
                })
                .collect();
            p
        })
        .collect()
}
