use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{BucketEdges, DEFAULT_THRESHOLD};
use crate::metrics::Metric;
use crate::normalize::DEFAULT_MIN_TOKENS;
use crate::verify::DEFAULT_PER_BUCKET;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub run_dir: PathBuf,
    pub min_tokens: usize,
    pub threshold: f64,
    pub buckets: BucketEdges,
    pub per_bucket: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub exclude_same_developer: bool,
    pub jobs: usize,
    /// Histogram bin width for score distributions.
    pub bin_width: f64,
    /// Screen Jaccard pairs with MinHash; pairs far below the threshold get
    /// no record.
    pub minhash_prefilter: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            run_dir: PathBuf::from("run"),
            min_tokens: DEFAULT_MIN_TOKENS,
            threshold: DEFAULT_THRESHOLD,
            buckets: BucketEdges::default(),
            per_bucket: DEFAULT_PER_BUCKET,
            seed: DEFAULT_SEED,
            metrics: Metric::ALL.to_vec(),
            exclude_same_developer: true,
            jobs: default_jobs(),
            bin_width: 1.0,
            minhash_prefilter: false,
        }
    }
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunConfig {
    pub fn new(run_dir: impl Into<PathBuf>) -> Self {
        Self { run_dir: run_dir.into(), ..Self::default() }
    }

    /// Metrics in canonical order without duplicates.
    pub fn metric_set(&self) -> Vec<Metric> {
        let mut m = self.metrics.clone();
        m.sort();
        m.dedup();
        m
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    pub fn layout(&self) -> RunLayout {
        RunLayout::new(&self.run_dir)
    }
}

/// Paths inside a run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus")
    }

    pub fn docs(&self) -> PathBuf {
        self.root.join("docs")
    }

    pub fn docs_index(&self) -> PathBuf {
        self.docs().join("index.json")
    }

    pub fn scores(&self) -> PathBuf {
        self.root.join("scores")
    }

    pub fn analysis(&self) -> PathBuf {
        self.root.join("analysis")
    }

    pub fn analysis_summary(&self) -> PathBuf {
        self.analysis().join("summary.json")
    }

    pub fn verify(&self) -> PathBuf {
        self.root.join("verify")
    }

    pub fn plan(&self) -> PathBuf {
        self.verify().join("plan.json")
    }

    pub fn labels(&self) -> PathBuf {
        self.verify().join("labels.ndjson")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report")
    }
}
