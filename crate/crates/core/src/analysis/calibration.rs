use serde::{Deserialize, Serialize};

use super::{wilson_interval, AnalysisError, Bucket, BucketCounts, Z_95};
use crate::metrics::Metric;
use crate::pairwise::ComparisonGroup;

/// One current label, reduced to what calibration needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelObservation {
    pub metric: Metric,
    pub group: ComparisonGroup,
    pub bucket: usize,
    pub clone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub metric: Metric,
    pub group: ComparisonGroup,
    pub bucket: Bucket,
    pub total_pairs: u64,
    pub sampled: u64,
    pub clones: u64,
    /// Absent when nothing in the bucket has been labeled.
    pub proportion: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

/// One row per (metric, group, bucket) of `counts`, in that order.
pub fn calibration_table(counts: &[BucketCounts], labels: &[LabelObservation]) -> Result<Vec<CalibrationRow>, AnalysisError> {
    let mut tallies: Vec<Vec<(u64, u64)>> = counts.iter().map(|c| vec![(0, 0); c.counts.len()]).collect();
    for l in labels {
        let slot = counts
            .iter()
            .position(|c| c.metric == l.metric && c.group == l.group)
            .and_then(|i| tallies[i].get_mut(l.bucket))
            .ok_or(AnalysisError::UnknownStratum { metric: l.metric, group: l.group, bucket: l.bucket })?;
        slot.0 += 1;
        slot.1 += u64::from(l.clone);
    }
    let mut rows = Vec::new();
    for (c, tally) in counts.iter().zip(tallies) {
        for (i, (sampled, clones)) in tally.into_iter().enumerate() {
            let total_pairs = c.counts[i];
            if sampled > total_pairs {
                return Err(AnalysisError::OverSampled { metric: c.metric, group: c.group, bucket: i, sampled, total: total_pairs });
            }
            let ci = (sampled > 0).then(|| wilson_interval(clones, sampled, Z_95)).transpose()?;
            rows.push(CalibrationRow {
                metric: c.metric,
                group: c.group,
                bucket: c.buckets[i],
                total_pairs,
                sampled,
                clones,
                proportion: ci.map(|w| w.proportion),
                ci_lo: ci.map(|w| w.lo),
                ci_hi: ci.map(|w| w.hi),
            });
        }
    }
    Ok(rows)
}
