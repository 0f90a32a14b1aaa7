//! Subcommands over a run directory.

use std::fmt::Display;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use toolclone::analysis::BucketEdges;
use toolclone::metrics::Metric;
use toolclone::run::{self, RunConfig, RunError, RunLayout};
use toolclone::verify::{CloneLabel, LabelSubmission, RubricNotes};

#[derive(Debug, Parser)]
#[command(name = "toolclone", version, about = "Clone audit pipeline for tool repositories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: RunOpts,
}

/// Pipeline settings. Unset flags fall back to the run's saved config, then
/// to defaults.
#[derive(Debug, Default, Clone, Args)]
pub struct RunOpts {
    /// Newline-delimited JSON manifest of repositories.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Run directory.
    #[arg(long, global = true, default_value = "run")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub min_tokens: Option<usize>,
    /// Candidate threshold on the 0-100 score scale.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Comma-separated bucket edges, e.g. 0,20,40,60,80,100.
    #[arg(long, global = true)]
    pub buckets: Option<BucketEdges>,
    #[arg(long, global = true)]
    pub per_bucket: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated metrics: jaccard, ctph.
    #[arg(long, global = true, value_delimiter = ',')]
    pub metrics: Option<Vec<Metric>>,
    /// Keep pairs whose repositories share a developer.
    #[arg(long, global = true)]
    pub no_exclude_same_developer: bool,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read the manifest and snapshot repository metadata.
    Ingest,
    /// Filter and normalize source files into per-repository documents.
    Normalize,
    /// Score every eligible pair under each metric.
    Score,
    /// Histograms, buckets, candidates and clusters.
    Analyze,
    /// Draw the stratified verification sample.
    Sample,
    /// Record, import or export verification labels.
    Label {
        #[command(subcommand)]
        action: LabelAction,
    },
    /// Serve the review API on 127.0.0.1.
    Serve,
    /// Write report tables from the analysis and current labels.
    Report,
    /// Every stage except label and serve.
    All,
}

#[derive(Debug, Subcommand)]
pub enum LabelAction {
    /// Record one label for a sampled pair.
    Record {
        /// Sample id, as listed in the plan.
        #[arg(long)]
        pair: String,
        #[arg(long)]
        label: CloneLabel,
        #[arg(long)]
        annotator: String,
        /// Rubric note as key=text; the key is a step name or number 1-6.
        #[arg(long = "note")]
        notes: Vec<String>,
    },
    /// Append labels from an exported file.
    Import {
        #[arg(long)]
        file: PathBuf,
    },
    /// Write the full label history.
    Export {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Debug)]
pub struct CliError(pub String);

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        Self(e.to_string())
    }
}

fn err(e: impl Display) -> CliError {
    CliError(e.to_string())
}

impl RunOpts {
    /// Saved config of the run directory (if any) with flags applied.
    pub fn config(&self, fresh: bool) -> Result<RunConfig, CliError> {
        let layout = RunLayout::new(&self.out);
        let mut cfg = match fs::read_to_string(layout.config()) {
            Ok(text) if !fresh => serde_json::from_str(&text).map_err(|e| err(format!("{}: {e}", layout.config().display())))?,
            _ => RunConfig::default(),
        };
        cfg.run_dir = self.out.clone();
        if let Some(m) = &self.manifest {
            cfg.manifest = Some(m.clone());
        }
        if let Some(v) = self.min_tokens {
            cfg.min_tokens = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let Some(v) = &self.buckets {
            cfg.buckets = v.clone();
        }
        if let Some(v) = self.per_bucket {
            cfg.per_bucket = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.metrics {
            cfg.metrics = v.clone();
        }
        if self.no_exclude_same_developer {
            cfg.exclude_same_developer = false;
        }
        if let Some(v) = self.jobs {
            cfg.jobs = v.max(1);
        }
        Ok(cfg)
    }
}

fn parse_notes(raw: &[String]) -> Result<RubricNotes, CliError> {
    let mut notes = RubricNotes::default();
    for n in raw {
        let (key, text) = n.split_once('=').ok_or_else(|| err(format!("note {n:?} is not key=text")))?;
        if !notes.set(key.trim(), text) {
            return Err(err(format!("unknown rubric step {key:?}")));
        }
    }
    Ok(notes)
}

fn label(opts: &RunOpts, action: LabelAction) -> Result<Vec<String>, CliError> {
    let layout = RunLayout::new(&opts.out);
    let plan = run::load_plan(&layout)?;
    let mut store = run::open_labels(&layout)?;
    match action {
        LabelAction::Record { pair, label, annotator, notes } => {
            let submission = LabelSubmission { label, annotator, rubric_notes: parse_notes(&notes)? };
            let stored = store.record_label(&plan, &pair, submission, chrono::Utc::now()).map_err(err)?.label;
            let n = store.history_of(&pair).len();
            Ok(vec![format!("{pair}: {} ({n} in history)", label_name(stored))])
        }
        LabelAction::Import { file } => {
            let text = fs::read_to_string(&file).map_err(|e| err(format!("{}: {e}", file.display())))?;
            let report = store.import(&plan, &text).map_err(err)?;
            let mut lines = vec![format!("imported {}, duplicates {}, errors {}", report.imported, report.duplicates, report.errors.len())];
            lines.extend(report.errors.iter().map(|e| format!("line {}: {}", e.line, e.message)));
            Ok(lines)
        }
        LabelAction::Export { file } => {
            store.export_to(&file).map_err(err)?;
            Ok(vec![format!("wrote {} labels to {}", store.history().len(), file.display())])
        }
    }
}

fn label_name(l: CloneLabel) -> &'static str {
    match l {
        CloneLabel::Clone => "clone",
        CloneLabel::NonClone => "non-clone",
    }
}

/// Run one parsed command; returns the lines to print.
pub fn execute(cli: Cli) -> Result<Vec<String>, CliError> {
    let opts = &cli.opts;
    let paths = |ps: Vec<PathBuf>| ps.iter().map(|p| p.display().to_string()).collect();
    Ok(match cli.command {
        Command::Ingest => {
            let store = run::ingest(&opts.config(true)?)?;
            let s = &store.summary;
            vec![format!("ingested {} repositories ({} merged, {} dropped)", s.ingested, s.merged, s.dropped)]
        }
        Command::Normalize => {
            let index = run::normalize(&opts.config(false)?)?;
            vec![format!("normalized {} documents", index.documents.len())]
        }
        Command::Score => {
            let summary = run::score(&opts.config(false)?)?;
            summary.sets.iter().map(|s| format!("{} {}: {} pairs", s.group.as_str(), s.metric, s.records)).collect()
        }
        Command::Analyze => {
            let a = run::analyze(&opts.config(false)?)?;
            a.sets
                .iter()
                .map(|s| {
                    let p = &s.prevalence;
                    format!(
                        "{} {}: {} candidates, {} repos, largest cluster {}",
                        s.group.as_str(),
                        s.metric,
                        p.candidate_pairs,
                        p.repos_involved,
                        p.largest_cluster
                    )
                })
                .collect()
        }
        Command::Sample => {
            let plan = run::sample(&opts.config(false)?)?;
            vec![format!("sampled {} pairs in {} strata", plan.sampled_count(), plan.strata.len())]
        }
        Command::Label { action } => label(opts, action)?,
        Command::Serve => {
            let layout = RunLayout::new(&opts.out);
            toolclone_server::serve_blocking(layout, opts.port).map_err(err)?;
            Vec::new()
        }
        Command::Report => paths(run::report(&opts.config(false)?)?),
        Command::All => paths(run::all(&opts.config(true)?)?),
    })
}
