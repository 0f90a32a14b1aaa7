use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_rational::Ratio;

use super::{MetricError, SimilarityScore};
use crate::scalar::{round_half_up, Scalar};

/// Exact Jaccard ratio `|A ∩ B| / |A ∪ B|` kept as integer counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JaccardRatio {
    pub shared: u64,
    pub union: u64,
}

impl JaccardRatio {
    pub fn ratio(self) -> Ratio<u64> {
        Ratio::new(self.shared, self.union)
    }

    /// `100 * shared / union` with a single rounding step.
    pub fn score<S: Scalar>(self) -> SimilarityScore<S> {
        let num = S::from_u64(100 * self.shared).unwrap_or_else(S::zero);
        let den = S::from_u64(self.union).unwrap_or_else(S::one);
        SimilarityScore(num / den)
    }

    /// Percentage rounded to four decimals, the precision used in reports.
    pub fn rounded_percent(self) -> f64 {
        round_half_up(self.score::<f64>().value(), 4)
    }
}

/// Jaccard similarity over two sorted, deduplicated slices.
pub fn jaccard_sorted<T: Ord>(a: &[T], b: &[T]) -> Result<JaccardRatio, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyInput("jaccard"));
    }
    debug_assert!(a.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(b.windows(2).all(|w| w[0] < w[1]));
    let (mut i, mut j, mut shared) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() as u64 + b.len() as u64 - shared;
    Ok(JaccardRatio { shared, union })
}

/// Jaccard similarity of two token sets.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Result<JaccardRatio, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyInput("jaccard"));
    }
    let shared = a.intersection(b).count() as u64;
    let union = a.len() as u64 + b.len() as u64 - shared;
    Ok(JaccardRatio { shared, union })
}
