//! Multinomial conversion of temporal topic trends to sampled case counts.
//!
//! A temporal trend is a probability distribution over time points, so
//! its values live in [0, 1] while official case counts are in the
//! hundreds or thousands. Drawing `n` time points from the trend (where
//! `n` is the cumulative official count available so far) and histogram-
//! ming them yields a series at the counts' numerical scale that keeps
//! the trend's shape.

use rand::Rng as _;

use crate::error::Error;
use crate::rng::rng_from_seed;
use crate::Result;

/// Integer counts obtained by multinomial sampling from a trend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledCounts {
    values: Vec<u64>,
    total: u64,
}

impl SampledCounts {
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// How far a trend vector may stray from summing to one before it is
/// rejected instead of silently renormalized. Absorbs float drift from
/// posterior export; anything larger signals broken input.
const SUM_TOLERANCE: f64 = 1e-6;

fn checked_weights(xi: &[f64]) -> Result<Vec<f64>> {
    if xi.is_empty() {
        return Err(Error::Data("trend vector is empty".into()));
    }
    if let Some(bad) = xi.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Data(format!(
            "trend entries must be finite and non-negative, got {bad}"
        )));
    }
    let sum: f64 = xi.iter().sum();
    if sum <= 0.0 {
        return Err(Error::Data("trend vector sums to zero".into()));
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::Data(format!(
            "trend vector sums to {sum}, outside 1 +/- {SUM_TOLERANCE}"
        )));
    }
    Ok(xi.iter().map(|v| v / sum).collect())
}

/// Draw `total` time points from the trend and return per-time-point
/// frequencies. Deterministic given `rng_seed`; conservation
/// `sum(values) == total` holds exactly.
pub fn sample_counts(xi: &[f64], total: u64, rng_seed: u64) -> Result<SampledCounts> {
    let weights = checked_weights(xi)?;
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let last = cumulative.len() - 1;

    let mut rng = rng_from_seed(rng_seed);
    let mut values = vec![0u64; weights.len()];
    for _ in 0..total {
        let u: f64 = rng.random();
        let slot = cumulative.partition_point(|&c| c <= u).min(last);
        values[slot] += 1;
    }
    Ok(SampledCounts { values, total })
}

/// Deterministic variant: `total * xi` elementwise, after the same
/// validation. The mean of `sample_counts` over many seeds converges to
/// this.
pub fn expected_counts(xi: &[f64], total: u64) -> Result<Vec<f64>> {
    let weights = checked_weights(xi)?;
    Ok(weights.iter().map(|w| w * total as f64).collect())
}

/// Cumulative case count through `up_to` (inclusive), rounded half-up —
/// the sample size prescribed for trend-to-count conversion.
pub fn cumulative_total(case_counts: &[f64], up_to: usize) -> u64 {
    let sum: f64 = case_counts[..=up_to.min(case_counts.len() - 1)].iter().sum();
    (sum + 0.5).floor() as u64
}
