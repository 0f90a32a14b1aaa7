//! Reduce a repository to one canonical text stream and its token set.
//!
//! Files are collected in bytewise path order, comments are stripped per
//! language family, contents are joined with `\n`, then whitespace is
//! collapsed and everything is lowercased. Tokens are maximal runs of
//! `[a-z0-9_]` in the result.

mod comments;
mod files;
mod text;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{RepoId, RepoRecord};
use crate::metrics::FuzzyHash;

pub use comments::{strip_comments, LanguageFamily};
pub use files::{collect_source_files, FileFilterPolicy, FileListing};
pub(crate) use files::join_relative;
pub use text::{is_token_byte, normalize_text, tokenize};

/// Repositories with fewer normalized tokens are excluded from scoring.
pub const DEFAULT_MIN_TOKENS: usize = 50;

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("corrupt document metadata {path}: {source}")]
    Meta {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl NormalizeError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedDocument {
    pub repo_id: RepoId,
    pub byte_stream: String,
    pub token_set: BTreeSet<String>,
    /// Tokens in sequence order, before collapsing to a set.
    pub token_count: usize,
    pub file_count: usize,
    pub unreadable_files: usize,
}

impl NormalizedDocument {
    pub fn from_stream(repo_id: RepoId, byte_stream: String, file_count: usize, unreadable_files: usize) -> Self {
        let tokens = tokenize(&byte_stream);
        let token_count = tokens.len();
        let token_set = tokens.into_iter().map(str::to_owned).collect();
        Self { repo_id, byte_stream, token_set, token_count, file_count, unreadable_files }
    }

    /// SHA-256 over the sorted tokens, newline separated.
    pub fn token_set_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for token in &self.token_set {
            hasher.update(token.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Normalized form of a single file, as the metrics see it.
pub fn normalize_file(rel_path: &str, raw: &[u8]) -> String {
    let text = String::from_utf8_lossy(raw);
    normalize_text(&strip_comments(&text, LanguageFamily::from_path(rel_path)))
}

pub fn build_document(repo: &RepoRecord, policy: &FileFilterPolicy) -> Result<NormalizedDocument, NormalizeError> {
    build_document_at(repo.repo_id.clone(), &repo.local_path, policy)
}

pub fn build_document_at(
    repo_id: RepoId,
    root: &Path,
    policy: &FileFilterPolicy,
) -> Result<NormalizedDocument, NormalizeError> {
    let listing = collect_source_files(root, policy)?;
    let mut unreadable = listing.unreadable;
    let mut pieces = Vec::with_capacity(listing.paths.len());
    for rel in &listing.paths {
        match fs::read(join_relative(root, rel)) {
            Ok(raw) => {
                let text = String::from_utf8_lossy(&raw);
                pieces.push(strip_comments(&text, LanguageFamily::from_path(rel)));
            }
            Err(_) => unreadable += 1,
        }
    }
    let file_count = pieces.len();
    let stream = normalize_text(&pieces.join("\n"));
    Ok(NormalizedDocument::from_stream(repo_id, stream, file_count, unreadable))
}

pub fn passes_size_filter(doc: &NormalizedDocument, min_tokens: usize) -> bool {
    doc.token_count >= min_tokens
}

/// Sidecar written next to each `.norm` stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub repo_id: RepoId,
    pub token_count: usize,
    pub unique_tokens: usize,
    pub file_count: usize,
    pub unreadable_files: usize,
    pub token_set_sha256: String,
    /// Absent when the normalized stream is empty.
    pub ctph: Option<FuzzyHash>,
}

impl DocumentMeta {
    pub fn new(doc: &NormalizedDocument, ctph: Option<FuzzyHash>) -> Self {
        Self {
            repo_id: doc.repo_id.clone(),
            token_count: doc.token_count,
            unique_tokens: doc.token_set.len(),
            file_count: doc.file_count,
            unreadable_files: doc.unreadable_files,
            token_set_sha256: doc.token_set_digest(),
            ctph,
        }
    }
}

pub fn stream_path(dir: &Path, id: &RepoId) -> PathBuf {
    dir.join(format!("{id}.norm"))
}

pub fn meta_path(dir: &Path, id: &RepoId) -> PathBuf {
    dir.join(format!("{id}.meta.json"))
}

pub fn write_document(dir: &Path, doc: &NormalizedDocument, meta: &DocumentMeta) -> Result<(), NormalizeError> {
    let sp = stream_path(dir, &doc.repo_id);
    fs::write(&sp, doc.byte_stream.as_bytes()).map_err(|e| NormalizeError::io(&sp, e))?;
    let mp = meta_path(dir, &doc.repo_id);
    let mut json = serde_json::to_string_pretty(meta).expect("meta serializes");
    json.push('\n');
    fs::write(&mp, json).map_err(|e| NormalizeError::io(&mp, e))
}

pub fn read_meta(dir: &Path, id: &RepoId) -> Result<DocumentMeta, NormalizeError> {
    let path = meta_path(dir, id);
    let text = fs::read_to_string(&path).map_err(|e| NormalizeError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|source| NormalizeError::Meta { path, source })
}

pub fn read_document(dir: &Path, id: &RepoId) -> Result<NormalizedDocument, NormalizeError> {
    let meta = read_meta(dir, id)?;
    let path = stream_path(dir, id);
    let stream = fs::read_to_string(&path).map_err(|e| NormalizeError::io(&path, e))?;
    Ok(NormalizedDocument::from_stream(id.clone(), stream, meta.file_count, meta.unreadable_files))
}
