//! Throughput arithmetic and repetition statistics.

/// Mean and sample standard deviation of a set of repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (denominator `R - 1`); `None` when `R < 2`.
    pub std: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("no values to summarise")]
    EmptyInput,
}

pub fn compute_stats(values: &[f64]) -> Result<Summary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let std = (values.len() >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (count - 1.0))
    });
    Ok(Summary { mean, std })
}

/// Floating-point operations of one `n x n` GEMM: a multiply and an add per
/// innermost iteration. The `alpha`/`beta` epilogue is not counted.
pub fn flops_for(n: u64) -> u64 {
    2 * n * n * n
}

pub fn gflops(n: u64, elapsed_seconds: f64) -> f64 {
    flops_for(n) as f64 / elapsed_seconds / 1e9
}
