//! Tool-description length statistics and developer concentration.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::ReportSection;
use crate::corpus::{CorpusStore, Ecosystem, RepoId};
use crate::normalize::{normalize_text, tokenize};

/// Markdown syntax removed from descriptions before tokenizing.
pub const FORMATTING_CHARS: [char; 10] = ['*', '_', '`', '#', '>', '[', ']', '~', '|', '\\'];

/// Token count of one description after formatting removal.
pub fn description_tokens(description: &str) -> usize {
    let stripped: String = description.chars().filter(|c| !FORMATTING_CHARS.contains(c)).collect();
    tokenize(&normalize_text(&stripped)).len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionStats {
    pub ecosystem: Ecosystem,
    pub count: usize,
    pub median: Option<usize>,
    pub p90: Option<usize>,
    pub p95: Option<usize>,
    pub max: Option<usize>,
    pub mean: Option<f64>,
}

/// Nearest-rank percentile of an ascending slice.
pub fn nearest_rank(sorted: &[usize], pct: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

pub fn length_stats(ecosystem: Ecosystem, mut lengths: Vec<usize>) -> DescriptionStats {
    lengths.retain(|&n| n > 0);
    lengths.sort_unstable();
    let mean = (!lengths.is_empty()).then(|| lengths.iter().sum::<usize>() as f64 / lengths.len() as f64);
    DescriptionStats {
        ecosystem,
        count: lengths.len(),
        median: nearest_rank(&lengths, 50.0),
        p90: nearest_rank(&lengths, 90.0),
        p95: nearest_rank(&lengths, 95.0),
        max: lengths.last().copied(),
        mean,
    }
}

/// Statistics over every non-empty description in `ecosystem`.
pub fn description_length_stats(corpus: &CorpusStore, ecosystem: Ecosystem) -> DescriptionStats {
    let lengths = corpus
        .by_ecosystem(ecosystem)
        .flat_map(|r| r.tool_descriptions.iter())
        .map(|d| description_tokens(d))
        .collect();
    length_stats(ecosystem, lengths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeveloperShareRow {
    pub ecosystem: Ecosystem,
    pub top_k: usize,
    pub tools: u64,
    pub tool_share: f64,
    pub repos: usize,
    pub repo_share: f64,
}

/// Tool counts taken from the manifest descriptions of each repository.
pub fn tool_counts(corpus: &CorpusStore) -> BTreeMap<RepoId, u64> {
    corpus.records().iter().map(|r| (r.repo_id.clone(), r.tool_descriptions.len() as u64)).collect()
}

/// Cumulative tool and repository shares of the top `k` developers.
///
/// Developers are ranked by tool count, descending, ties by key. Repositories
/// missing from `tool_counts` count as zero tools.
pub fn developer_concentration(
    corpus: &CorpusStore,
    ecosystem: Ecosystem,
    tool_counts: &BTreeMap<RepoId, u64>,
    ks: &[usize],
) -> Vec<DeveloperShareRow> {
    let mut per_dev: HashMap<&str, (u64, usize)> = HashMap::new();
    for r in corpus.by_ecosystem(ecosystem) {
        let e = per_dev.entry(r.developer_key.as_str()).or_default();
        e.0 += tool_counts.get(&r.repo_id).copied().unwrap_or(0);
        e.1 += 1;
    }
    let mut ranked: Vec<(&str, u64, usize)> = per_dev.into_iter().map(|(d, (t, n))| (d, t, n)).collect();
    ranked.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    let total_tools: u64 = ranked.iter().map(|d| d.1).sum();
    let total_repos: usize = ranked.iter().map(|d| d.2).sum();
    let share = |part: f64, whole: f64| if whole > 0.0 { part / whole } else { 0.0 };
    ks.iter()
        .map(|&k| {
            let top = &ranked[..k.min(ranked.len())];
            let tools: u64 = top.iter().map(|d| d.1).sum();
            let repos: usize = top.iter().map(|d| d.2).sum();
            DeveloperShareRow {
                ecosystem,
                top_k: k,
                tools,
                tool_share: share(tools as f64, total_tools as f64),
                repos,
                repo_share: share(repos as f64, total_repos as f64),
            }
        })
        .collect()
}

pub const DEFAULT_TOP_K: [usize; 4] = [1, 10, 50, 100];

fn pct(v: f64) -> String {
    format!("{:.1}%", crate::scalar::round_half_up(v * 100.0, 1))
}

pub fn concentration_section(rows: &[DeveloperShareRow]) -> ReportSection {
    let mut csv = String::from("ecosystem,top_k,tools,tool_share,repos,repo_share\n");
    let mut md = String::from("| Ecosystem | Top-k | Tools | Share | Repos | Repo Share |\n|---|---:|---:|---:|---:|---:|\n");
    for r in rows {
        let _ = writeln!(csv, "{},{},{},{},{},{}", r.ecosystem, r.top_k, r.tools, r.tool_share, r.repos, r.repo_share);
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} |",
            r.ecosystem,
            r.top_k,
            r.tools,
            pct(r.tool_share),
            r.repos,
            pct(r.repo_share)
        );
    }
    ReportSection { stem: "developer_concentration".into(), title: "Developer concentration".into(), csv, markdown: md }
}

pub fn description_section(stats: &[DescriptionStats]) -> ReportSection {
    let o = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let mean = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
    let mut csv = String::from("ecosystem,count,median,p90,p95,max,mean\n");
    let mut md = String::from("| Ecosystem | Descriptions | Median | P90 | P95 | Max | Mean |\n|---|---:|---:|---:|---:|---:|---:|\n");
    for s in stats {
        let row = [s.count.to_string(), o(s.median), o(s.p90), o(s.p95), o(s.max), mean(s.mean)];
        let _ = writeln!(csv, "{},{}", s.ecosystem, row.join(","));
        let _ = writeln!(md, "| {} | {} |", s.ecosystem, row.join(" | "));
    }
    ReportSection { stem: "description_lengths".into(), title: "Description lengths (tokens)".into(), csv, markdown: md }
}
