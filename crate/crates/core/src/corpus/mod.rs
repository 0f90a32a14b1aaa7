//! Repository corpus: manifest ingestion, deduplication by canonical URL,
//! and local language statistics.

mod language;
mod url;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::normalize::FileFilterPolicy;

pub use self::url::{canonicalize_url, url_owner};
pub use language::{language_bytes, language_for_path, primary_language, NON_PRIMARY_LANGUAGES, UNKNOWN_LANGUAGE};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("corpus is empty: no manifest row survived ingestion")]
    Empty,
    #[error("repository id collision between {0} and {1}")]
    IdCollision(String, String),
    #[error("corrupt corpus store {path}: {message}")]
    Store { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

/// Opaque, stable repository identifier derived from the canonical URL.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RepoId(Arc<str>);

impl RepoId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(Arc::from(id.into()))
    }

    pub fn from_canonical_url(canonical: &str) -> Self {
        let digest = Sha256::digest(canonical.as_bytes());
        Self(Arc::from(hex::encode(&digest[..8])))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RepoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Ecosystem {
    #[serde(rename = "MCP")]
    Mcp,
    #[serde(rename = "Skills")]
    Skills,
}

impl Ecosystem {
    pub const ALL: [Ecosystem; 2] = [Ecosystem::Mcp, Ecosystem::Skills];

    pub fn as_str(self) -> &'static str {
        match self {
            Ecosystem::Mcp => "MCP",
            Ecosystem::Skills => "Skills",
        }
    }
}

impl fmt::Display for Ecosystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ecosystem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mcp" => Ok(Ecosystem::Mcp),
            "skills" | "skill" => Ok(Ecosystem::Skills),
            other => Err(format!("unknown ecosystem {other:?} (expected MCP or Skills)")),
        }
    }
}

/// Case-folded, trimmed developer identity.
pub fn developer_key(raw: &str) -> String {
    raw.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoRecord {
    pub repo_id: RepoId,
    pub ecosystem: Ecosystem,
    pub developer_key: String,
    pub source_url: String,
    pub display_name: String,
    pub local_path: PathBuf,
    pub languages: BTreeMap<String, u64>,
    pub primary_language: String,
    #[serde(default)]
    pub tool_descriptions: Vec<String>,
}

/// One manifest line, with the field names used on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRow {
    pub ecosystem: String,
    pub url: String,
    #[serde(default)]
    pub developer: String,
    #[serde(default)]
    pub name: String,
    pub path: String,
    #[serde(default)]
    pub descriptions: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub line: usize,
    pub ecosystem: Ecosystem,
    pub row: ManifestRow,
}

/// Parsed manifest. Blank lines are ignored and do not count as rows.
#[derive(Debug, Clone, Default)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory against which relative `path` values are resolved.
    pub base_dir: PathBuf,
}

impl CorpusManifest {
    pub fn read(path: &Path) -> Result<Self, CorpusError> {
        let file = fs::File::open(path).map_err(io_err(path))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut manifest = Self::parse(BufReader::new(file))?;
        manifest.base_dir = base_dir;
        Ok(manifest)
    }

    pub fn parse(reader: impl BufRead) -> Result<Self, CorpusError> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| CorpusError::Parse { line: line_no, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let row: ManifestRow = serde_json::from_str(&line)
                .map_err(|e| CorpusError::Parse { line: line_no, message: e.to_string() })?;
            let ecosystem = row
                .ecosystem
                .parse()
                .map_err(|message| CorpusError::Parse { line: line_no, message })?;
            if row.url.trim().is_empty() {
                return Err(CorpusError::Parse { line: line_no, message: "empty url".into() });
            }
            if row.path.trim().is_empty() {
                return Err(CorpusError::Parse { line: line_no, message: "empty path".into() });
            }
            entries.push(ManifestEntry { line: line_no, ecosystem, row });
        }
        Ok(Self { entries, base_dir: PathBuf::new() })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub ingested: usize,
    pub merged: usize,
    pub dropped: usize,
}

/// Immutable set of repository records, sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStore {
    records: Vec<RepoRecord>,
    index: HashMap<RepoId, usize>,
    pub summary: IngestSummary,
}

pub const RECORDS_FILE: &str = "records.ndjson";
pub const SUMMARY_FILE: &str = "summary.json";

impl CorpusStore {
    pub fn from_records(mut records: Vec<RepoRecord>, summary: IngestSummary) -> Self {
        records.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));
        let index = records.iter().enumerate().map(|(i, r)| (r.repo_id.clone(), i)).collect();
        Self { records, index, summary }
    }

    pub fn records(&self) -> &[RepoRecord] {
        &self.records
    }

    pub fn get(&self, id: &RepoId) -> Option<&RepoRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn by_ecosystem(&self, eco: Ecosystem) -> impl Iterator<Item = &RepoRecord> {
        self.records.iter().filter(move |r| r.ecosystem == eco)
    }

    pub fn write(&self, dir: &Path) -> Result<(), CorpusError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        let rp = dir.join(RECORDS_FILE);
        fs::write(&rp, out).map_err(io_err(&rp))?;
        let sp = dir.join(SUMMARY_FILE);
        let mut summary = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        summary.push('\n');
        fs::write(&sp, summary).map_err(io_err(&sp))
    }

    pub fn read(dir: &Path) -> Result<Self, CorpusError> {
        let rp = dir.join(RECORDS_FILE);
        let text = fs::read_to_string(&rp).map_err(io_err(&rp))?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec: RepoRecord = serde_json::from_str(line).map_err(|e| CorpusError::Store {
                path: rp.clone(),
                message: format!("line {}: {e}", i + 1),
            })?;
            records.push(rec);
        }
        let sp = dir.join(SUMMARY_FILE);
        let summary_text = fs::read_to_string(&sp).map_err(io_err(&sp))?;
        let summary = serde_json::from_str(&summary_text)
            .map_err(|e| CorpusError::Store { path: sp.clone(), message: e.to_string() })?;
        Ok(Self::from_records(records, summary))
    }
}

#[derive(Debug)]
struct PendingRecord {
    ecosystem: Ecosystem,
    canonical_url: String,
    developer: String,
    name: String,
    path: PathBuf,
    descriptions: Vec<String>,
}

fn resolve_path(base: &Path, raw: &str) -> Option<PathBuf> {
    let p = Path::new(raw.trim());
    let joined = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let resolved = fs::canonicalize(&joined).ok()?;
    fs::read_dir(&resolved).ok()?;
    Some(resolved)
}

/// Build a corpus store from a parsed manifest.
///
/// Rows whose path is missing, not a directory, or unreadable are dropped.
/// Remaining rows sharing a canonical URL are merged: the first non-empty
/// value wins for scalar fields and description lists are concatenated
/// without duplicates. `ingested + merged + dropped` equals the row count.
pub fn ingest(manifest: &CorpusManifest, policy: &FileFilterPolicy) -> Result<CorpusStore, CorpusError> {
    let mut summary = IngestSummary::default();
    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, PendingRecord> = HashMap::new();

    for entry in &manifest.entries {
        let row = &entry.row;
        let Some(path) = resolve_path(&manifest.base_dir, &row.path) else {
            summary.dropped += 1;
            continue;
        };
        let canonical = canonicalize_url(&row.url);
        if canonical.is_empty() {
            summary.dropped += 1;
            continue;
        }
        match pending.get_mut(&canonical) {
            Some(existing) => {
                summary.merged += 1;
                if existing.developer.is_empty() {
                    existing.developer = developer_key(&row.developer);
                }
                if existing.name.is_empty() {
                    existing.name = row.name.trim().to_string();
                }
                for d in &row.descriptions {
                    if !existing.descriptions.contains(d) {
                        existing.descriptions.push(d.clone());
                    }
                }
            }
            None => {
                let mut descriptions: Vec<String> = Vec::new();
                for d in &row.descriptions {
                    if !descriptions.contains(d) {
                        descriptions.push(d.clone());
                    }
                }
                order.push(canonical.clone());
                pending.insert(
                    canonical.clone(),
                    PendingRecord {
                        ecosystem: entry.ecosystem,
                        canonical_url: canonical,
                        developer: developer_key(&row.developer),
                        name: row.name.trim().to_string(),
                        path,
                        descriptions,
                    },
                );
            }
        }
    }

    let mut records = Vec::with_capacity(order.len());
    let mut seen_ids: HashMap<RepoId, String> = HashMap::new();
    for url in order {
        let p = pending.remove(&url).expect("pending record present");
        let languages = match language_bytes(&p.path, policy) {
            Ok(l) => l,
            Err(_) => {
                summary.dropped += 1;
                continue;
            }
        };
        let repo_id = RepoId::from_canonical_url(&p.canonical_url);
        if let Some(other) = seen_ids.insert(repo_id.clone(), p.canonical_url.clone()) {
            return Err(CorpusError::IdCollision(other, p.canonical_url));
        }
        let developer = if p.developer.is_empty() {
            url_owner(&p.canonical_url).map(developer_key).unwrap_or_else(|| p.canonical_url.clone())
        } else {
            p.developer
        };
        let display_name = if p.name.is_empty() {
            p.canonical_url.rsplit('/').next().unwrap_or_default().to_string()
        } else {
            p.name
        };
        records.push(RepoRecord {
            repo_id,
            ecosystem: p.ecosystem,
            developer_key: developer,
            primary_language: primary_language(&languages),
            languages,
            source_url: p.canonical_url,
            display_name,
            local_path: p.path,
            tool_descriptions: p.descriptions,
        });
    }
    summary.ingested = records.len();
    if records.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(CorpusStore::from_records(records, summary))
}

/// Parse the manifest at `manifest_path` and ingest it.
pub fn ingest_manifest(manifest_path: &Path, policy: &FileFilterPolicy) -> Result<CorpusStore, CorpusError> {
    ingest(&CorpusManifest::read(manifest_path)?, policy)
}

/// Language statistics for one record, recomputed from disk.
pub fn detect_primary_language(repo: &RepoRecord, policy: &FileFilterPolicy) -> Result<String, crate::normalize::NormalizeError> {
    Ok(primary_language(&language_bytes(&repo.local_path, policy)?))
}
