use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::scalar::{round_half_up, Scalar};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval<S = f64> {
    pub proportion: S,
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> WilsonInterval<S> {
    /// Proportion and bounds rounded half-up, as printed in reports.
    pub fn rounded(&self, places: u32) -> Self {
        Self {
            proportion: round_half_up(self.proportion, places),
            lo: round_half_up(self.lo, places),
            hi: round_half_up(self.hi, places),
        }
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval<S: Scalar>(k: u64, n: u64, z: S) -> Result<WilsonInterval<S>, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::EmptySample);
    }
    if k > n {
        return Err(AnalysisError::CountExceedsSample { k, n });
    }
    let one = S::one();
    let two = one + one;
    let four = two + two;
    let nf = S::from_u64(n).unwrap_or_else(S::infinity);
    let p = S::from_u64(k).unwrap_or_else(S::zero) / nf;
    let z2 = z * z;
    let denom = one + z2 / nf;
    let center = (p + z2 / (two * nf)) / denom;
    let half = z * (p * (one - p) / nf + z2 / (four * nf * nf)).sqrt() / denom;
    // The bounds are exactly 0 and 1 at the extremes.
    let lo = if k == 0 { S::zero() } else { (center - half).max(S::zero()) };
    let hi = if k == n { one } else { (center + half).min(one) };
    Ok(WilsonInterval { proportion: p, lo, hi })
}
