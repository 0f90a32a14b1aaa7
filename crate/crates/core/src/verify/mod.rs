//! Stratified sampling of scored pairs and the human label store.

mod labels;
mod plan;
mod rubric;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use labels::{format_timestamp, CloneLabel, ImportReport, LabelStore, LabelSubmission, RowError, VerificationLabel};
pub use plan::{sample_id, stratified_sample, PlanEntry, SamplePlan, SampledPair, Stratum, DEFAULT_PER_BUCKET};
pub use rubric::{RubricNotes, RubricStep, RUBRIC};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{0} is not in the sample plan")]
    NotInPlan(String),
    #[error("invalid label: {0}")]
    Invalid(String),
    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl VerifyError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}
