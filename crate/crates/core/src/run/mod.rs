//! Pipeline stages over a run directory.
//!
//! ```text
//! run/
//!   config.json
//!   corpus/    records.ndjson, summary.json
//!   docs/      <repo_id>.norm, <repo_id>.meta.json, index.json
//!   scores/    <group>.<metric>.ndjson, summary.json
//!   analysis/  summary.json, candidates.*.ndjson, clusters.*.json
//!   verify/    plan.json, labels.ndjson
//!   report/    *.csv, *.md, run_metadata.json
//! ```

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    bucketize, calibration_table, cluster_candidates, emit_report, extract_candidates, prevalence_report,
    AnalysisError, BucketCounts, BucketEdges, Candidate, CalibrationRow, PrevalenceReport, ReportInputs,
};
use crate::corpus::{self, CorpusError, CorpusStore, Ecosystem, RepoId};
use crate::metadata::{
    concentration_section, description_length_stats, description_section, developer_concentration, tool_counts,
    DEFAULT_TOP_K, FORMATTING_CHARS,
};
use crate::metrics::{ctph_digest, Metric};
use crate::normalize::{self, build_document, DocumentMeta, FileFilterPolicy, NormalizeError};
use crate::pairwise::{
    enumerate_pairs, score_all, score_histogram, ComparisonGroup, Histogram, MinHashFilter, PairwiseError, ScoreSet,
    ScoreSetSummary, ScoreStore, ScoreSummary, ScoringIndex, ScoringOptions,
};
use crate::verify::{stratified_sample, LabelStore, SamplePlan, VerifyError};

pub use config::{default_jobs, RunConfig, RunLayout, DEFAULT_SEED};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("missing {path}: run `{stage}` first")]
    Missing { stage: &'static str, path: PathBuf },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Pairwise(#[from] PairwiseError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

fn require(path: PathBuf, stage: &'static str) -> Result<PathBuf, RunError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(RunError::Missing { stage, path })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    fs::write(path, s).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| RunError::Corrupt { path: path.to_path_buf(), message: e.to_string() })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, RunError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))
}

fn validate(cfg: &RunConfig) -> Result<(), RunError> {
    if !(0.0..=100.0).contains(&cfg.threshold) {
        return Err(RunError::Config(format!("threshold {} outside [0, 100]", cfg.threshold)));
    }
    if cfg.per_bucket == 0 {
        return Err(RunError::Config("per-bucket must be at least 1".into()));
    }
    if cfg.metrics.is_empty() {
        return Err(RunError::Config("at least one metric is required".into()));
    }
    Histogram::new(cfg.bin_width)?;
    Ok(())
}

fn save_config(cfg: &RunConfig) -> Result<(), RunError> {
    validate(cfg)?;
    let layout = cfg.layout();
    fs::create_dir_all(&layout.root).map_err(io_err(&layout.root))?;
    let path = layout.config();
    fs::write(&path, cfg.to_json()).map_err(io_err(&path))
}

pub fn load_corpus(layout: &RunLayout) -> Result<CorpusStore, RunError> {
    let dir = require(layout.corpus(), "ingest")?;
    Ok(CorpusStore::read(&dir)?)
}

pub fn ingest(cfg: &RunConfig) -> Result<CorpusStore, RunError> {
    let manifest = cfg.manifest.as_ref().ok_or_else(|| RunError::Config("ingest requires --manifest".into()))?;
    save_config(cfg)?;
    let store = corpus::ingest_manifest(manifest, &FileFilterPolicy::default())?;
    store.write(&cfg.layout().corpus())?;
    Ok(store)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocIndexEntry {
    pub repo_id: RepoId,
    pub ecosystem: Ecosystem,
    pub token_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocsIndex {
    pub documents: Vec<DocIndexEntry>,
}

pub fn normalize(cfg: &RunConfig) -> Result<DocsIndex, RunError> {
    let layout = cfg.layout();
    let corpus = load_corpus(&layout)?;
    save_config(cfg)?;
    let dir = layout.docs();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let policy = FileFilterPolicy::default();
    let entries: Vec<DocIndexEntry> = pool(cfg.jobs)?.install(|| {
        corpus
            .records()
            .par_iter()
            .map(|rec| {
                let doc = build_document(rec, &policy)?;
                let ctph = if doc.byte_stream.is_empty() {
                    None
                } else {
                    Some(ctph_digest(doc.byte_stream.as_bytes()).map_err(|e| RunError::Config(format!("{}: {e}", rec.repo_id)))?)
                };
                normalize::write_document(&dir, &doc, &DocumentMeta::new(&doc, ctph))?;
                Ok(DocIndexEntry { repo_id: rec.repo_id.clone(), ecosystem: rec.ecosystem, token_count: doc.token_count })
            })
            .collect::<Result<_, RunError>>()
    })?;
    let index = DocsIndex { documents: entries };
    write_json(&layout.docs_index(), &index)?;
    Ok(index)
}

pub fn load_docs_index(layout: &RunLayout) -> Result<DocsIndex, RunError> {
    read_json(&require(layout.docs_index(), "normalize")?)
}

pub fn score(cfg: &RunConfig) -> Result<ScoreSummary, RunError> {
    let layout = cfg.layout();
    let corpus = load_corpus(&layout)?;
    let docs = load_docs_index(&layout)?;
    save_config(cfg)?;

    let token_counts: BTreeMap<&RepoId, usize> = docs.documents.iter().map(|d| (&d.repo_id, d.token_count)).collect();
    let mut qualifying = Vec::new();
    let mut below = Vec::new();
    for rec in corpus.records() {
        let count = token_counts
            .get(&rec.repo_id)
            .copied()
            .ok_or_else(|| RunError::Pairwise(PairwiseError::MissingDocument(rec.repo_id.clone())))?;
        if count >= cfg.min_tokens {
            qualifying.push(rec);
        } else {
            below.push(rec.repo_id.clone());
        }
    }

    let docs_dir = layout.docs();
    let loaded: Vec<_> = pool(cfg.jobs)?.install(|| {
        qualifying
            .par_iter()
            .map(|rec| {
                let doc = normalize::read_document(&docs_dir, &rec.repo_id)?;
                let meta = normalize::read_meta(&docs_dir, &rec.repo_id)?;
                Ok((doc, meta.ctph))
            })
            .collect::<Result<Vec<_>, RunError>>()
    })?;
    let mut index = ScoringIndex::new();
    for (doc, ctph) in &loaded {
        index.insert(doc.repo_id.clone(), doc.token_set.iter().map(String::as_str), ctph.as_ref());
    }
    drop(loaded);

    let store = ScoreStore::new(layout.scores());
    fs::create_dir_all(store.dir()).map_err(io_err(store.dir()))?;
    let options = ScoringOptions {
        workers: cfg.jobs,
        minhash: cfg.minhash_prefilter.then(|| MinHashFilter::new(cfg.threshold)),
    };
    let metrics = cfg.metric_set();
    let mut summary = ScoreSummary {
        exclude_same_developer: cfg.exclude_same_developer,
        minhash: options.minhash,
        below_min_tokens: below,
        ..ScoreSummary::default()
    };
    for eco in Ecosystem::ALL {
        summary.qualifying_repos.insert(eco.to_string(), qualifying.iter().filter(|r| r.ecosystem == eco).count());
    }
    for group in ComparisonGroup::ALL {
        let pairs = enumerate_pairs(qualifying.iter().copied(), group, cfg.exclude_same_developer);
        summary.excluded_same_developer.insert(group, pairs.excluded_same_developer);
        for set in score_all(&pairs.pairs, group, &mut index, &metrics, &options)? {
            store.write_set(&set)?;
            summary.sets.push(ScoreSetSummary { group, metric: set.metric, records: set.len() });
        }
    }
    store.write_summary(&summary)?;
    Ok(summary)
}

pub fn load_score_summary(layout: &RunLayout) -> Result<ScoreSummary, RunError> {
    require(layout.scores().join(crate::pairwise::SCORE_SUMMARY_FILE), "score")?;
    Ok(ScoreStore::new(layout.scores()).read_summary()?)
}

/// Every score set listed in the score summary.
pub fn load_score_sets(layout: &RunLayout) -> Result<Vec<ScoreSet>, RunError> {
    let summary = load_score_summary(layout)?;
    let store = ScoreStore::new(layout.scores());
    summary.sets.iter().map(|s| Ok(store.read_set(s.group, s.metric)?)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetAnalysis {
    pub group: ComparisonGroup,
    pub metric: Metric,
    pub records: usize,
    pub buckets: BucketCounts,
    pub histogram: Histogram,
    pub prevalence: PrevalenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub threshold: f64,
    pub edges: BucketEdges,
    pub sets: Vec<SetAnalysis>,
}

fn write_candidates(path: &Path, candidates: &[Candidate]) -> Result<(), RunError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    for c in candidates {
        let row = serde_json::json!({ "a": c.pair.a, "b": c.pair.b, "score": c.score });
        writeln!(w, "{row}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn analyze(cfg: &RunConfig) -> Result<AnalysisSummary, RunError> {
    let layout = cfg.layout();
    let sets = load_score_sets(&layout)?;
    save_config(cfg)?;
    let dir = layout.analysis();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut out = AnalysisSummary { threshold: cfg.threshold, edges: cfg.buckets.clone(), sets: Vec::new() };
    for set in &sets {
        let candidates = extract_candidates(set, cfg.threshold);
        let stem = format!("{}.{}", set.group, set.metric);
        write_candidates(&dir.join(format!("candidates.{stem}.ndjson")), &candidates)?;
        let clusters = cluster_candidates(candidates.iter().map(|c| &c.pair));
        write_json(&dir.join(format!("clusters.{stem}.json")), &clusters)?;
        out.sets.push(SetAnalysis {
            group: set.group,
            metric: set.metric,
            records: set.len(),
            buckets: bucketize(set, &cfg.buckets)?,
            histogram: score_histogram(set.values(), cfg.bin_width)?,
            prevalence: prevalence_report(&candidates, set.metric, set.group, cfg.threshold),
        });
    }
    write_json(&layout.analysis_summary(), &out)?;
    Ok(out)
}

pub fn load_analysis(layout: &RunLayout) -> Result<AnalysisSummary, RunError> {
    read_json(&require(layout.analysis_summary(), "analyze")?)
}

pub fn sample(cfg: &RunConfig) -> Result<SamplePlan, RunError> {
    let layout = cfg.layout();
    let sets = load_score_sets(&layout)?;
    save_config(cfg)?;
    let plan = stratified_sample(&sets, &cfg.buckets, cfg.per_bucket, cfg.seed)?;
    fs::create_dir_all(layout.verify()).map_err(io_err(&layout.verify()))?;
    plan.write(&layout.plan())?;
    Ok(plan)
}

pub fn load_plan(layout: &RunLayout) -> Result<SamplePlan, RunError> {
    Ok(SamplePlan::read(&require(layout.plan(), "sample")?)?)
}

pub fn open_labels(layout: &RunLayout) -> Result<LabelStore, RunError> {
    Ok(LabelStore::open(&layout.labels())?)
}

/// Bucket totals as recorded in the plan, one entry per (metric, group).
pub fn plan_bucket_counts(plan: &SamplePlan) -> Vec<BucketCounts> {
    let mut by_key: BTreeMap<(Metric, ComparisonGroup), BucketCounts> = BTreeMap::new();
    for s in &plan.strata {
        let entry = by_key.entry((s.metric, s.group)).or_insert_with(|| BucketCounts {
            metric: s.metric,
            group: s.group,
            buckets: plan.edges.buckets(),
            counts: vec![0; plan.edges.len()],
        });
        entry.counts[s.bucket] = s.total;
    }
    by_key.into_values().collect()
}

pub fn calibration(plan: &SamplePlan, labels: &LabelStore) -> Result<Vec<CalibrationRow>, RunError> {
    Ok(calibration_table(&plan_bucket_counts(plan), &labels.observations())?)
}

/// Assumptions recorded with every report.
pub fn assumptions() -> Vec<String> {
    let chars: String = FORMATTING_CHARS.iter().collect();
    vec![
        "Both metrics read the normalized stream: comment-stripped, whitespace-collapsed, lowercased.".into(),
        "Tokens are maximal runs of [a-z0-9_]; Jaccard compares token sets.".into(),
        "Developer identity is the manifest developer string, trimmed and lowercased, with the URL owner as fallback.".into(),
        "Same-developer exclusion also applies to MCP-Skills pairs.".into(),
        "Buckets are half-open except the top bucket, which is closed at 100.".into(),
        "Clusters are computed per metric and group; candidate sets of different metrics are never merged.".into(),
        "Labels are kept per metric; a pair sampled under both metrics is labeled twice.".into(),
        format!("Description lengths use the code tokenizer after removing {chars:?}; percentiles use nearest rank."),
        "Tool counts are the number of manifest descriptions per repository.".into(),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata<'a> {
    pub config: &'a RunConfig,
    pub config_hash: String,
    pub wilson_z: f64,
    pub ingest: &'a corpus::IngestSummary,
    pub scores: &'a ScoreSummary,
    pub assumptions: Vec<String>,
}

pub fn report(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let layout = cfg.layout();
    let corpus = load_corpus(&layout)?;
    let scores = load_score_summary(&layout)?;
    let analysis = load_analysis(&layout)?;
    save_config(cfg)?;

    let bucket_counts: Vec<BucketCounts> = analysis.sets.iter().map(|s| s.buckets.clone()).collect();
    let labels = if layout.plan().exists() { open_labels(&layout)?.observations() } else { Vec::new() };
    let calibration = calibration_table(&bucket_counts, &labels)?;

    let counts = tool_counts(&corpus);
    let concentration: Vec<_> = Ecosystem::ALL
        .iter()
        .flat_map(|&eco| developer_concentration(&corpus, eco, &counts, &DEFAULT_TOP_K))
        .collect();
    let descriptions: Vec<_> = Ecosystem::ALL.iter().map(|&eco| description_length_stats(&corpus, eco)).collect();

    let metadata = RunMetadata {
        config: cfg,
        config_hash: cfg.hash(),
        wilson_z: crate::analysis::Z_95,
        ingest: &corpus.summary,
        scores: &scores,
        assumptions: assumptions(),
    };
    let inputs = ReportInputs {
        histograms: analysis.sets.iter().map(|s| (s.group, s.metric, s.histogram.clone())).collect(),
        bucket_counts,
        prevalence: analysis.sets.iter().map(|s| s.prevalence.clone()).collect(),
        calibration,
        sections: vec![description_section(&descriptions), concentration_section(&concentration)],
        metadata: serde_json::to_value(&metadata).expect("metadata serializes"),
    };
    Ok(emit_report(&layout.report(), &inputs)?)
}

/// Every stage except serving and labeling, in order.
pub fn all(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    ingest(cfg)?;
    normalize(cfg)?;
    score(cfg)?;
    analyze(cfg)?;
    sample(cfg)?;
    report(cfg)
}
