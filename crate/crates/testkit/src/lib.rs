//! Deterministic synthetic corpora: repositories of code-like text with
//! controllable overlap, plus the manifest that describes them.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A pool of random lowercase identifiers.
pub fn vocabulary(rng: &mut impl Rng, size: usize) -> Vec<String> {
    let mut words: Vec<String> = (0..size)
        .map(|_| {
            let len = rng.random_range(4..=10);
            (0..len).map(|_| char::from(b'a' + rng.random_range(0..26u8))).collect()
        })
        .collect();
    words.sort();
    words.dedup();
    words
}

pub fn random_tokens(rng: &mut impl Rng, vocab: &[String], n: usize) -> Vec<String> {
    (0..n).map(|_| vocab.choose(rng).expect("non-empty vocabulary").clone()).collect()
}

/// Render tokens as statements `a = b(c, d);`, four tokens per line.
pub fn render_source(tokens: &[String]) -> String {
    let mut out = String::new();
    for chunk in tokens.chunks(4) {
        match chunk {
            [a, b, c, d] => out.push_str(&format!("{a} = {b}({c}, {d});\n")),
            rest => {
                out.push_str(&rest.join(" "));
                out.push('\n');
            }
        }
    }
    out
}

/// Replace `fraction` of the tokens with fresh words, grouped in `spans`
/// contiguous runs spread over the sequence.
pub fn plant_edits(rng: &mut impl Rng, tokens: &[String], fraction: f64, spans: usize) -> Vec<String> {
    let mut out = tokens.to_vec();
    let edits = ((tokens.len() as f64) * fraction).floor() as usize;
    if edits == 0 || spans == 0 {
        return out;
    }
    let per_span = edits.div_ceil(spans);
    let stride = tokens.len() / spans;
    let mut left = edits;
    for s in 0..spans {
        let start = s * stride + rng.random_range(0..stride.saturating_sub(per_span).max(1));
        for t in out.iter_mut().skip(start).take(per_span.min(left)) {
            *t = format!("edit{}x{}", rng.random_range(0..1_000_000u32), s);
        }
        left = left.saturating_sub(per_span);
    }
    out
}

/// One repository on disk and its manifest row.
#[derive(Debug, Clone)]
pub struct SynthRepo {
    pub name: String,
    pub ecosystem: String,
    pub developer: String,
    pub url: String,
    pub path: PathBuf,
}

/// Builds repositories under a root directory and writes a manifest.
#[derive(Debug)]
pub struct SynthCorpus {
    pub root: PathBuf,
    pub repos: Vec<SynthRepo>,
}

impl SynthCorpus {
    pub fn new(root: &Path) -> Self {
        fs::create_dir_all(root).expect("create corpus root");
        Self { root: root.to_path_buf(), repos: Vec::new() }
    }

    /// Write `files` into a new repository and register it.
    pub fn add(&mut self, ecosystem: &str, developer: &str, name: &str, files: &[(&str, String)]) -> &SynthRepo {
        let path = self.root.join("repos").join(name);
        for (rel, content) in files {
            let p = path.join(rel);
            fs::create_dir_all(p.parent().expect("file has a parent")).expect("create repo dir");
            fs::write(&p, content).expect("write repo file");
        }
        fs::create_dir_all(&path).expect("create repo dir");
        self.repos.push(SynthRepo {
            name: name.to_string(),
            ecosystem: ecosystem.to_string(),
            developer: developer.to_string(),
            url: format!("https://github.com/{developer}/{name}"),
            path,
        });
        self.repos.last().expect("just pushed")
    }

    /// Newline-delimited manifest with one row per repository.
    pub fn write_manifest(&self) -> PathBuf {
        let mut out = String::new();
        for r in &self.repos {
            let row = serde_json::json!({
                "ecosystem": r.ecosystem,
                "url": r.url,
                "developer": r.developer,
                "name": r.name,
                "path": r.path,
                "descriptions": [format!("Tool from {}", r.name)],
            });
            out.push_str(&row.to_string());
            out.push('\n');
        }
        let path = self.root.join("manifest.ndjson");
        fs::write(&path, out).expect("write manifest");
        path
    }
}

/// Canonical URL key of a synthetic repository, as ingestion computes it.
pub fn canonical_url(repo: &SynthRepo) -> String {
    format!("github.com/{}/{}", repo.developer, repo.name)
}
