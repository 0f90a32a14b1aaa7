use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{RubricNotes, SamplePlan, VerifyError};
use crate::analysis::LabelObservation;
use crate::corpus::RepoId;
use crate::metrics::Metric;
use crate::pairwise::ComparisonGroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CloneLabel {
    #[serde(rename = "clone")]
    Clone,
    #[serde(rename = "non-clone")]
    NonClone,
}

impl CloneLabel {
    pub fn is_clone(self) -> bool {
        self == CloneLabel::Clone
    }
}

impl std::str::FromStr for CloneLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "clone" => Ok(CloneLabel::Clone),
            "non-clone" | "nonclone" => Ok(CloneLabel::NonClone),
            other => Err(format!("label must be clone or non-clone, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationLabel {
    pub id: String,
    pub a: RepoId,
    pub b: RepoId,
    pub metric: Metric,
    pub group: ComparisonGroup,
    pub bucket: usize,
    pub label: CloneLabel,
    pub annotator: String,
    #[serde(default)]
    pub rubric_notes: RubricNotes,
    pub timestamp: DateTime<Utc>,
}

/// What an annotator submits for one sampled pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSubmission {
    pub label: CloneLabel,
    pub annotator: String,
    #[serde(default)]
    pub rubric_notes: RubricNotes,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    pub imported: usize,
    pub duplicates: usize,
    pub errors: Vec<RowError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

/// Append-only label log with a current view keyed by sample id.
#[derive(Debug, Clone, Default)]
pub struct LabelStore {
    path: Option<PathBuf>,
    history: Vec<VerificationLabel>,
    current: BTreeMap<String, usize>,
}

fn check_against_plan(plan: &SamplePlan, label: &VerificationLabel) -> Result<(), VerifyError> {
    let entry = plan.get(&label.id).ok_or_else(|| VerifyError::NotInPlan(label.id.clone()))?;
    let st = entry.stratum;
    if st.metric != label.metric || st.group != label.group || st.bucket != label.bucket || entry.pair.a != label.a || entry.pair.b != label.b {
        return Err(VerifyError::Invalid(format!("label fields disagree with plan entry {}", label.id)));
    }
    if label.annotator.trim().is_empty() {
        return Err(VerifyError::Invalid("annotator must not be empty".into()));
    }
    Ok(())
}

impl LabelStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open or create the log at `path`, replaying existing rows.
    pub fn open(path: &Path) -> Result<Self, VerifyError> {
        let mut store = Self { path: Some(path.to_path_buf()), ..Self::default() };
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| VerifyError::io(path, e))?;
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let label: VerificationLabel = serde_json::from_str(line)
                    .map_err(|e| VerifyError::Parse(format!("{} line {}: {e}", path.display(), i + 1)))?;
                store.push(label);
            }
        }
        Ok(store)
    }

    fn push(&mut self, label: VerificationLabel) {
        self.current.insert(label.id.clone(), self.history.len());
        self.history.push(label);
    }

    fn append(&mut self, label: VerificationLabel) -> Result<(), VerifyError> {
        if let Some(path) = &self.path {
            let mut line = serde_json::to_string(&label).expect("label serializes");
            line.push('\n');
            let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| VerifyError::io(path, e))?;
            f.write_all(line.as_bytes()).map_err(|e| VerifyError::io(path, e))?;
            f.sync_data().map_err(|e| VerifyError::io(path, e))?;
        }
        self.push(label);
        Ok(())
    }

    /// Validate a submission for sample `id` and append it.
    pub fn record_label(
        &mut self,
        plan: &SamplePlan,
        id: &str,
        submission: LabelSubmission,
        timestamp: DateTime<Utc>,
    ) -> Result<&VerificationLabel, VerifyError> {
        let entry = plan.get(id).ok_or_else(|| VerifyError::NotInPlan(id.to_string()))?;
        let label = VerificationLabel {
            id: id.to_string(),
            a: entry.pair.a.clone(),
            b: entry.pair.b.clone(),
            metric: entry.stratum.metric,
            group: entry.stratum.group,
            bucket: entry.stratum.bucket,
            label: submission.label,
            annotator: submission.annotator.trim().to_string(),
            rubric_notes: submission.rubric_notes,
            timestamp: timestamp.with_timezone(&Utc),
        };
        check_against_plan(plan, &label)?;
        self.append(label)?;
        Ok(self.history.last().expect("just appended"))
    }

    pub fn history(&self) -> &[VerificationLabel] {
        &self.history
    }

    pub fn history_of(&self, id: &str) -> Vec<&VerificationLabel> {
        self.history.iter().filter(|l| l.id == id).collect()
    }

    pub fn current(&self, id: &str) -> Option<&VerificationLabel> {
        self.current.get(id).map(|&i| &self.history[i])
    }

    /// Current labels in sample id order.
    pub fn current_view(&self) -> Vec<&VerificationLabel> {
        self.current.values().map(|&i| &self.history[i]).collect()
    }

    pub fn observations(&self) -> Vec<LabelObservation> {
        self.current_view()
            .into_iter()
            .map(|l| LabelObservation { metric: l.metric, group: l.group, bucket: l.bucket, clone: l.label.is_clone() })
            .collect()
    }

    /// Full history as newline-delimited JSON.
    pub fn export(&self) -> String {
        self.history.iter().map(|l| serde_json::to_string(l).expect("label serializes") + "\n").collect()
    }

    pub fn export_to(&self, path: &Path) -> Result<(), VerifyError> {
        fs::write(path, self.export()).map_err(|e| VerifyError::io(path, e))
    }

    /// Import exported rows. Rows already in the history are skipped; rows
    /// that fail to parse or do not match the plan are reported and skipped.
    pub fn import(&mut self, plan: &SamplePlan, text: &str) -> Result<ImportReport, VerifyError> {
        let mut report = ImportReport::default();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row_err = |message: String| RowError { line: i + 1, message };
            let label: VerificationLabel = match serde_json::from_str(line) {
                Ok(l) => l,
                Err(e) => {
                    report.errors.push(row_err(e.to_string()));
                    continue;
                }
            };
            if let Err(e) = check_against_plan(plan, &label) {
                report.errors.push(row_err(e.to_string()));
                continue;
            }
            if self.history.contains(&label) {
                report.duplicates += 1;
                continue;
            }
            self.append(label)?;
            report.imported += 1;
        }
        Ok(report)
    }
}

/// RFC 3339 with second precision, the form written in label files.
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}
