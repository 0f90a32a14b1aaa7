//! Repository similarity metrics. Both map onto `[0, 100]`.

pub mod ctph;
mod jaccard;
mod minhash;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use ctph::{ctph_compare, ctph_digest, FuzzyHash, PreparedHash};
pub use jaccard::{jaccard, jaccard_sorted, JaccardRatio};
pub use minhash::{minhash_signature, signature_agreement, MinHasher};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("{0} requires non-empty input")]
    EmptyInput(&'static str),
    #[error("input of {0} bytes exceeds the digest size limit")]
    InputTooLarge(u64),
    #[error("malformed fuzzy hash: {0}")]
    Format(String),
    #[error("score {0} outside [0, 100]")]
    OutOfRange(f64),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
}

/// A similarity value on the percentage scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore<S = f64>(S);

impl<S: Scalar> SimilarityScore<S> {
    pub fn new(value: S) -> Result<Self, MetricError> {
        if value >= S::zero() && value <= S::hundred() {
            Ok(Self(value))
        } else {
            Err(MetricError::OutOfRange(value.to_f64().unwrap_or(f64::NAN)))
        }
    }

    pub(crate) fn from_percent_u32(v: u32) -> Self {
        debug_assert!(v <= 100);
        Self(S::from_u32(v.min(100)).unwrap_or_else(S::zero))
    }

    pub fn value(self) -> S {
        self.0
    }
}

impl<S: Scalar> fmt::Display for SimilarityScore<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Jaccard,
    Ctph,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Jaccard, Metric::Ctph];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Jaccard => "jaccard",
            Metric::Ctph => "ctph",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Metric::Jaccard => "Jaccard",
            Metric::Ctph => "ssdeep",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jaccard" => Ok(Metric::Jaccard),
            "ctph" | "ssdeep" => Ok(Metric::Ctph),
            other => Err(MetricError::UnknownMetric(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_range_is_enforced() {
        assert!(SimilarityScore::new(0.0f64).is_ok());
        assert!(SimilarityScore::new(100.0f32).is_ok());
        assert!(SimilarityScore::new(100.0001f64).is_err());
        assert!(SimilarityScore::new(-0.1f64).is_err());
        assert!(SimilarityScore::new(f64::NAN).is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.as_str().parse::<Metric>().unwrap(), m);
        }
        assert_eq!("ssdeep".parse::<Metric>().unwrap(), Metric::Ctph);
        assert!("cosine".parse::<Metric>().is_err());
    }
}
