use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::metrics::Metric;
use crate::pairwise::{ComparisonGroup, ScoreSet};

pub const DEFAULT_EDGES: [f64; 6] = [0.0, 20.0, 40.0, 60.0, 80.0, 100.0];

/// A score stratum `[lo, hi)`, or `[lo, hi]` for the top bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub lo: f64,
    pub hi: f64,
    pub closed_hi: bool,
}

impl Bucket {
    pub fn contains(&self, score: f64) -> bool {
        score >= self.lo && (score < self.hi || (self.closed_hi && score == self.hi))
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.lo, self.hi)
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.closed_hi { ']' } else { ')' };
        write!(f, "[{}, {}{close}", self.lo, self.hi)
    }
}

/// Strictly increasing edges from 0 to 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BucketEdges(Vec<f64>);

impl Default for BucketEdges {
    fn default() -> Self {
        Self(DEFAULT_EDGES.to_vec())
    }
}

impl TryFrom<Vec<f64>> for BucketEdges {
    type Error = AnalysisError;

    fn try_from(edges: Vec<f64>) -> Result<Self, Self::Error> {
        let ok = edges.len() >= 2
            && edges.first() == Some(&0.0)
            && edges.last() == Some(&100.0)
            && edges.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(Self(edges))
        } else {
            Err(AnalysisError::InvalidEdges(edges))
        }
    }
}

impl From<BucketEdges> for Vec<f64> {
    fn from(e: BucketEdges) -> Self {
        e.0
    }
}

impl std::str::FromStr for BucketEdges {
    type Err = AnalysisError;

    /// Comma-separated edges, e.g. `0,20,40,60,80,100`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let edges = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| AnalysisError::InvalidEdges(Vec::new()))?;
        edges.try_into()
    }
}

impl BucketEdges {
    pub fn edges(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bucket(&self, i: usize) -> Bucket {
        Bucket { lo: self.0[i], hi: self.0[i + 1], closed_hi: i + 2 == self.0.len() }
    }

    pub fn buckets(&self) -> Vec<Bucket> {
        (0..self.len()).map(|i| self.bucket(i)).collect()
    }

    /// Index of the bucket holding `score`; `None` outside `[0, 100]`.
    pub fn index_of(&self, score: f64) -> Option<usize> {
        if !(0.0..=100.0).contains(&score) {
            return None;
        }
        let i = self.0.partition_point(|&e| e <= score);
        Some(i.saturating_sub(1).min(self.len() - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketCounts {
    pub metric: Metric,
    pub group: ComparisonGroup,
    pub buckets: Vec<Bucket>,
    pub counts: Vec<u64>,
}

impl BucketCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Per-bucket pair counts of one score set.
pub fn bucketize(set: &ScoreSet, edges: &BucketEdges) -> Result<BucketCounts, AnalysisError> {
    let mut counts = vec![0u64; edges.len()];
    for s in &set.scores {
        let i = edges.index_of(s.score).ok_or(AnalysisError::ScoreOutOfRange(s.score))?;
        counts[i] += 1;
    }
    Ok(BucketCounts { metric: set.metric, group: set.group, buckets: edges.buckets(), counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries() {
        let e = BucketEdges::default();
        assert_eq!(e.index_of(80.0), Some(4));
        assert_eq!(e.index_of(100.0), Some(4));
        assert_eq!(e.index_of(19.999), Some(0));
        assert_eq!(e.index_of(20.0), Some(1));
        assert_eq!(e.index_of(0.0), Some(0));
        assert_eq!(e.index_of(100.5), None);
        assert!(e.bucket(4).closed_hi && !e.bucket(3).closed_hi);
        assert_eq!(e.bucket(4).to_string(), "[80, 100]");
    }

    #[test]
    fn edges_are_validated() {
        assert!("0,50,100".parse::<BucketEdges>().is_ok());
        assert!("0,50,50,100".parse::<BucketEdges>().is_err());
        assert!("10,100".parse::<BucketEdges>().is_err());
        assert!("0,x,100".parse::<BucketEdges>().is_err());
        let json = serde_json::to_string(&BucketEdges::default()).unwrap();
        assert_eq!(json, "[0.0,20.0,40.0,60.0,80.0,100.0]");
        assert!(serde_json::from_str::<BucketEdges>("[0.0,100.0,50.0]").is_err());
    }

    proptest! {
        #[test]
        fn index_agrees_with_bucket_membership(score in 0.0f64..=100.0) {
            let e = BucketEdges::default();
            let i = e.index_of(score).unwrap();
            prop_assert!(e.bucket(i).contains(score));
            prop_assert_eq!(e.buckets().iter().filter(|b| b.contains(score)).count(), 1);
        }
    }
}
