use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ComparisonGroup, MinHashFilter, PairId, PairScore, PairwiseError, ScoreSet};
use crate::corpus::RepoId;
use crate::metrics::Metric;

pub const SCORE_SUMMARY_FILE: &str = "summary.json";

/// One line of a score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub a: RepoId,
    pub b: RepoId,
    pub group: ComparisonGroup,
    pub metric: Metric,
    pub score: f64,
}

pub fn score_file_name(group: ComparisonGroup, metric: Metric) -> String {
    format!("{group}.{metric}.ndjson")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSetSummary {
    pub group: ComparisonGroup,
    pub metric: Metric,
    pub records: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub sets: Vec<ScoreSetSummary>,
    pub exclude_same_developer: bool,
    /// Same-developer pairs left out of each group.
    pub excluded_same_developer: BTreeMap<ComparisonGroup, u64>,
    /// Repositories per ecosystem that passed the size filter.
    pub qualifying_repos: BTreeMap<String, usize>,
    pub minhash: Option<MinHashFilter>,
    /// Repositories left out by the size filter.
    #[serde(default)]
    pub below_min_tokens: Vec<RepoId>,
}

impl ScoreSummary {
    pub fn records(&self, group: ComparisonGroup, metric: Metric) -> Option<usize> {
        self.sets.iter().find(|s| s.group == group && s.metric == metric).map(|s| s.records)
    }
}

/// Score files of one run, `<group>.<metric>.ndjson` under a directory.
#[derive(Debug, Clone)]
pub struct ScoreStore {
    dir: PathBuf,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PairwiseError + '_ {
    move |source| PairwiseError::Io { path: path.to_path_buf(), source }
}

impl ScoreStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn set_path(&self, group: ComparisonGroup, metric: Metric) -> PathBuf {
        self.dir.join(score_file_name(group, metric))
    }

    pub fn write_set(&self, set: &ScoreSet) -> Result<(), PairwiseError> {
        fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let path = self.set_path(set.group, set.metric);
        let file = File::create(&path).map_err(io(&path))?;
        let mut w = BufWriter::with_capacity(1 << 20, file);
        for s in &set.scores {
            let rec = ScoreRecord {
                a: s.pair.a.clone(),
                b: s.pair.b.clone(),
                group: set.group,
                metric: set.metric,
                score: s.score,
            };
            serde_json::to_writer(&mut w, &rec).expect("score record serializes");
            w.write_all(b"\n").map_err(io(&path))?;
        }
        w.flush().map_err(io(&path))
    }

    pub fn read_set(&self, group: ComparisonGroup, metric: Metric) -> Result<ScoreSet, PairwiseError> {
        read_score_set(&self.set_path(group, metric), group, metric)
    }

    pub fn write_summary(&self, summary: &ScoreSummary) -> Result<(), PairwiseError> {
        fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let path = self.dir.join(SCORE_SUMMARY_FILE);
        let mut json = serde_json::to_string_pretty(summary).expect("summary serializes");
        json.push('\n');
        fs::write(&path, json).map_err(io(&path))
    }

    pub fn read_summary(&self) -> Result<ScoreSummary, PairwiseError> {
        let path = self.dir.join(SCORE_SUMMARY_FILE);
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        serde_json::from_str(&text).map_err(|e| PairwiseError::Parse { path, line: e.line(), message: e.to_string() })
    }
}

/// Read one score file, checking that every line belongs to `group` and
/// `metric`.
pub fn read_score_set(path: &Path, group: ComparisonGroup, metric: Metric) -> Result<ScoreSet, PairwiseError> {
    let file = File::open(path).map_err(io(path))?;
    let mut scores = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| PairwiseError::Parse { path: path.to_path_buf(), line: i + 1, message };
        let rec: ScoreRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if rec.group != group || rec.metric != metric {
            return Err(parse_err(format!("record for {}/{} in {group}/{metric} file", rec.group, rec.metric)));
        }
        if !(0.0..=100.0).contains(&rec.score) {
            return Err(parse_err(format!("score {} outside [0, 100]", rec.score)));
        }
        let pair = PairId::new(rec.a, rec.b).ok_or_else(|| parse_err("self pair".to_string()))?;
        scores.push(PairScore { pair, score: rec.score });
    }
    Ok(ScoreSet::new(group, metric, scores))
}
