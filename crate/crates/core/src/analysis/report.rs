use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{AnalysisError, BucketCounts, CalibrationRow, PrevalenceReport};
use crate::metrics::Metric;
use crate::pairwise::{ComparisonGroup, Histogram};
use crate::scalar::round_half_up;

/// An additional table rendered by another module.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSection {
    pub stem: String,
    pub title: String,
    pub csv: String,
    pub markdown: String,
}

#[derive(Debug, Clone, Default)]
pub struct ReportInputs {
    pub histograms: Vec<(ComparisonGroup, Metric, Histogram)>,
    pub bucket_counts: Vec<BucketCounts>,
    pub prevalence: Vec<PrevalenceReport>,
    pub calibration: Vec<CalibrationRow>,
    pub sections: Vec<ReportSection>,
    /// Parameters and assumptions of the run, embedded verbatim.
    pub metadata: serde_json::Value,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn two(v: f64) -> String {
    format!("{:.2}", round_half_up(v, 2))
}

pub fn calibration_csv(rows: &[CalibrationRow]) -> String {
    let mut out = String::from("metric,group,bucket_lo,bucket_hi,total,sampled,clones,proportion,ci_lo,ci_hi\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.metric,
            r.group,
            r.bucket.lo,
            r.bucket.hi,
            r.total_pairs,
            r.sampled,
            r.clones,
            opt(r.proportion),
            opt(r.ci_lo),
            opt(r.ci_hi)
        );
    }
    out
}

/// `0.60 (0.39-0.78)`, or `-` for an unsampled bucket.
pub fn format_rate(row: &CalibrationRow) -> String {
    match (row.proportion, row.ci_lo, row.ci_hi) {
        (Some(p), Some(lo), Some(hi)) => format!("{} ({}-{})", two(p), two(lo), two(hi)),
        _ => "-".to_string(),
    }
}

/// One panel per comparison group, rows grouped by metric.
pub fn calibration_markdown(rows: &[CalibrationRow]) -> String {
    let mut out = String::new();
    for group in ComparisonGroup::ALL {
        let panel: Vec<&CalibrationRow> = rows.iter().filter(|r| r.group == group).collect();
        if panel.is_empty() {
            continue;
        }
        let _ = writeln!(out, "### {}\n", group.display_name());
        out.push_str("| Metric | Bucket | Total Pairs | Clone/Samp. | Proportion (95% CI) |\n");
        out.push_str("|---|---|---:|---:|---:|\n");
        for r in panel {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {}/{} | {} |",
                r.metric.display_name(),
                r.bucket.label(),
                r.total_pairs,
                r.clones,
                r.sampled,
                format_rate(r)
            );
        }
        out.push('\n');
    }
    if out.is_empty() {
        out.push_str("No calibration rows.\n");
    }
    out
}

pub fn prevalence_csv(rows: &[PrevalenceReport]) -> String {
    let mut out = String::from("metric,group,threshold,candidate_pairs,repos_involved,largest_cluster\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.metric, r.group, r.threshold, r.candidate_pairs, r.repos_involved, r.largest_cluster
        );
    }
    out
}

pub fn prevalence_markdown(rows: &[PrevalenceReport]) -> String {
    let mut out = String::from("| Metric | Group | Threshold | Candidate pairs | Repos involved | Largest cluster |\n");
    out.push_str("|---|---|---|---:|---:|---:|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | >= {} | {} | {} | {} |",
            r.metric.display_name(),
            r.group.display_name(),
            r.threshold,
            r.candidate_pairs,
            r.repos_involved,
            r.largest_cluster
        );
    }
    out
}

pub fn bucket_counts_csv(counts: &[BucketCounts]) -> String {
    let mut out = String::from("metric,group,bucket_lo,bucket_hi,count\n");
    for c in counts {
        for (b, n) in c.buckets.iter().zip(&c.counts) {
            let _ = writeln!(out, "{},{},{},{},{n}", c.metric, c.group, b.lo, b.hi);
        }
    }
    out
}

fn histogram_markdown(histograms: &[(ComparisonGroup, Metric, Histogram)]) -> String {
    let mut out = String::from("| Group | Metric | Bin width | Pairs | Non-empty bins |\n|---|---|---:|---:|---:|\n");
    for (g, m, h) in histograms {
        let nonempty = h.counts.iter().filter(|&&c| c > 0).count();
        let _ = writeln!(out, "| {} | {} | {} | {} | {nonempty} |", g.display_name(), m.display_name(), h.bin_width, h.total());
    }
    out
}

fn write(dir: &Path, name: &str, content: &str, written: &mut Vec<PathBuf>) -> Result<(), AnalysisError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|source| AnalysisError::Io { path: path.clone(), source })?;
    written.push(path);
    Ok(())
}

/// Write CSV and Markdown renderings plus `run_metadata.json` into `dir`.
/// Returns the written paths.
pub fn emit_report(dir: &Path, inputs: &ReportInputs) -> Result<Vec<PathBuf>, AnalysisError> {
    fs::create_dir_all(dir).map_err(|source| AnalysisError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    for (g, m, h) in &inputs.histograms {
        write(dir, &format!("histogram.{g}.{m}.csv"), &h.to_csv(), &mut written)?;
    }
    write(dir, "buckets.csv", &bucket_counts_csv(&inputs.bucket_counts), &mut written)?;
    write(dir, "prevalence.csv", &prevalence_csv(&inputs.prevalence), &mut written)?;
    write(dir, "prevalence.md", &prevalence_markdown(&inputs.prevalence), &mut written)?;
    write(dir, "calibration.csv", &calibration_csv(&inputs.calibration), &mut written)?;
    write(dir, "calibration.md", &calibration_markdown(&inputs.calibration), &mut written)?;
    for s in &inputs.sections {
        write(dir, &format!("{}.csv", s.stem), &s.csv, &mut written)?;
        write(dir, &format!("{}.md", s.stem), &s.markdown, &mut written)?;
    }
    let mut meta = serde_json::to_string_pretty(&inputs.metadata).expect("metadata serializes");
    meta.push('\n');
    write(dir, "run_metadata.json", &meta, &mut written)?;

    let mut md = String::from("# Clone audit report\n\n## Score distributions\n\n");
    md.push_str(&histogram_markdown(&inputs.histograms));
    md.push_str("\n## Candidate prevalence\n\n");
    md.push_str(&prevalence_markdown(&inputs.prevalence));
    md.push_str("\n## Manual verification\n\n");
    md.push_str(&calibration_markdown(&inputs.calibration));
    for s in &inputs.sections {
        let _ = write!(md, "\n## {}\n\n{}", s.title, s.markdown);
    }
    md.push_str("\n## Run metadata\n\n```json\n");
    md.push_str(&meta);
    md.push_str("```\n");
    write(dir, "report.md", &md, &mut written)?;
    Ok(written)
}
