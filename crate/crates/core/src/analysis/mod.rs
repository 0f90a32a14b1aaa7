//! Buckets, candidates, clusters, prevalence and Wilson calibration.

mod buckets;
mod calibration;
mod clusters;
mod report;
mod wilson;

use std::path::PathBuf;

use thiserror::Error;

use crate::metrics::Metric;
use crate::pairwise::ComparisonGroup;

pub use buckets::{bucketize, Bucket, BucketCounts, BucketEdges, DEFAULT_EDGES};
pub use calibration::{calibration_table, CalibrationRow, LabelObservation};
pub use clusters::{cluster_candidates, extract_candidates, prevalence_report, Candidate, PrevalenceReport, UnionFind};
pub use report::{
    bucket_counts_csv, calibration_csv, calibration_markdown, emit_report, format_rate, prevalence_csv,
    prevalence_markdown, ReportInputs, ReportSection,
};
pub use wilson::{wilson_interval, WilsonInterval, Z_95};

/// Candidate threshold applied when none is configured.
pub const DEFAULT_THRESHOLD: f64 = 80.0;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("bucket edges must increase strictly from 0 to 100, got {0:?}")]
    InvalidEdges(Vec<f64>),
    #[error("score {0} outside [0, 100]")]
    ScoreOutOfRange(f64),
    #[error("interval requires at least one sampled pair")]
    EmptySample,
    #[error("{k} successes exceed sample size {n}")]
    CountExceedsSample { k: u64, n: u64 },
    #[error("label for unknown stratum {metric}/{group}/bucket {bucket}")]
    UnknownStratum { metric: Metric, group: ComparisonGroup, bucket: usize },
    #[error("{metric}/{group}/bucket {bucket}: {sampled} labels for {total} pairs")]
    OverSampled { metric: Metric, group: ComparisonGroup, bucket: usize, sampled: u64, total: u64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
