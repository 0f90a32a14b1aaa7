//! Pair enumeration per comparison group and parallel scoring.

mod histogram;
mod store;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Ecosystem, RepoId, RepoRecord};
use crate::metrics::{jaccard_sorted, signature_agreement, FuzzyHash, Metric, MinHasher, PreparedHash};

pub use histogram::{score_histogram, Histogram};
pub use store::{read_score_set, score_file_name, ScoreRecord, ScoreSetSummary, ScoreStore, ScoreSummary, SCORE_SUMMARY_FILE};

#[derive(Debug, Error)]
pub enum PairwiseError {
    #[error("no normalized document for repository {0}")]
    MissingDocument(RepoId),
    #[error("no CTPH digest for repository {0}")]
    MissingDigest(RepoId),
    #[error("bin width {0} does not divide 100 evenly")]
    InvalidBinWidth(f64),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComparisonGroup {
    #[serde(rename = "mcp-mcp")]
    McpMcp,
    #[serde(rename = "skills-skills")]
    SkillsSkills,
    #[serde(rename = "mcp-skills")]
    McpSkills,
}

impl ComparisonGroup {
    pub const ALL: [ComparisonGroup; 3] =
        [ComparisonGroup::McpMcp, ComparisonGroup::SkillsSkills, ComparisonGroup::McpSkills];

    pub fn as_str(self) -> &'static str {
        match self {
            ComparisonGroup::McpMcp => "mcp-mcp",
            ComparisonGroup::SkillsSkills => "skills-skills",
            ComparisonGroup::McpSkills => "mcp-skills",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ComparisonGroup::McpMcp => "MCP-MCP",
            ComparisonGroup::SkillsSkills => "Skills-Skills",
            ComparisonGroup::McpSkills => "MCP-Skills",
        }
    }

    pub fn ecosystems(self) -> (Ecosystem, Ecosystem) {
        match self {
            ComparisonGroup::McpMcp => (Ecosystem::Mcp, Ecosystem::Mcp),
            ComparisonGroup::SkillsSkills => (Ecosystem::Skills, Ecosystem::Skills),
            ComparisonGroup::McpSkills => (Ecosystem::Mcp, Ecosystem::Skills),
        }
    }

    pub fn of(a: Ecosystem, b: Ecosystem) -> Self {
        match (a, b) {
            (Ecosystem::Mcp, Ecosystem::Mcp) => ComparisonGroup::McpMcp,
            (Ecosystem::Skills, Ecosystem::Skills) => ComparisonGroup::SkillsSkills,
            _ => ComparisonGroup::McpSkills,
        }
    }

    pub fn is_cross(self) -> bool {
        self == ComparisonGroup::McpSkills
    }
}

impl fmt::Display for ComparisonGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComparisonGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.trim().to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphabetic()).collect();
        match key.as_str() {
            "mcpmcp" => Ok(ComparisonGroup::McpMcp),
            "skillsskills" => Ok(ComparisonGroup::SkillsSkills),
            "mcpskills" | "skillsmcp" => Ok(ComparisonGroup::McpSkills),
            _ => Err(format!("unknown comparison group {s:?}")),
        }
    }
}

/// Unordered repository pair, stored with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairId {
    pub a: RepoId,
    pub b: RepoId,
}

impl PairId {
    /// `None` when both sides are the same repository.
    pub fn new(x: RepoId, y: RepoId) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Self { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(Self { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.a, self.b)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairEnumeration {
    pub pairs: Vec<PairId>,
    pub excluded_same_developer: u64,
}

/// All pairs of `group` among `repos`, in ascending `PairId` order.
///
/// Callers pass only repositories that passed the size filter. Records of
/// ecosystems outside the group are ignored.
pub fn enumerate_pairs<'a, I>(repos: I, group: ComparisonGroup, exclude_same_developer: bool) -> PairEnumeration
where
    I: IntoIterator<Item = &'a RepoRecord>,
{
    let (left_eco, right_eco) = group.ecosystems();
    let mut left: Vec<&RepoRecord> = Vec::new();
    let mut right: Vec<&RepoRecord> = Vec::new();
    for r in repos {
        if r.ecosystem == left_eco {
            left.push(r);
        }
        if group.is_cross() && r.ecosystem == right_eco {
            right.push(r);
        }
    }
    left.sort_by(|x, y| x.repo_id.cmp(&y.repo_id));
    left.dedup_by(|x, y| x.repo_id == y.repo_id);
    right.sort_by(|x, y| x.repo_id.cmp(&y.repo_id));
    right.dedup_by(|x, y| x.repo_id == y.repo_id);

    let mut out = PairEnumeration::default();
    let mut push = |x: &RepoRecord, y: &RepoRecord| {
        if exclude_same_developer && x.developer_key == y.developer_key {
            out.excluded_same_developer += 1;
        } else if let Some(p) = PairId::new(x.repo_id.clone(), y.repo_id.clone()) {
            out.pairs.push(p);
        }
    };
    if group.is_cross() {
        for x in &left {
            for y in &right {
                push(x, y);
            }
        }
        out.pairs.sort_unstable();
    } else {
        for (i, x) in left.iter().enumerate() {
            for y in &left[i + 1..] {
                push(x, y);
            }
        }
    }
    out
}

/// Repository features needed for scoring, laid out for fast comparison.
#[derive(Debug, Clone)]
struct IndexedDoc {
    tokens: Vec<u32>,
    ctph: Option<PreparedHash>,
    minhash: Option<Vec<u64>>,
}

/// Read-only view of every document that may appear in a pair.
#[derive(Debug, Clone, Default)]
pub struct ScoringIndex {
    docs: HashMap<RepoId, IndexedDoc>,
    vocabulary: HashMap<String, u32>,
}

impl ScoringIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<'t, I>(&mut self, id: RepoId, tokens: I, ctph: Option<&FuzzyHash>)
    where
        I: IntoIterator<Item = &'t str>,
    {
        let mut ids: Vec<u32> = tokens
            .into_iter()
            .map(|t| match self.vocabulary.get(t) {
                Some(&id) => id,
                None => {
                    let id = self.vocabulary.len() as u32;
                    self.vocabulary.insert(t.to_owned(), id);
                    id
                }
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        self.docs.insert(id, IndexedDoc { tokens: ids, ctph: ctph.map(PreparedHash::new), minhash: None });
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn contains(&self, id: &RepoId) -> bool {
        self.docs.contains_key(id)
    }

    fn with_minhash(&mut self, hasher: &MinHasher) {
        for doc in self.docs.values_mut() {
            doc.minhash = hasher.signature(doc.tokens.iter().map(|t| t.to_le_bytes())).ok();
        }
    }

    fn get(&self, id: &RepoId) -> Result<&IndexedDoc, PairwiseError> {
        self.docs.get(id).ok_or_else(|| PairwiseError::MissingDocument(id.clone()))
    }
}

/// MinHash screening of Jaccard pairs. Pairs whose estimate falls below
/// `threshold - margin` are not scored exactly and do not get a record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinHashFilter {
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
    pub margin: f64,
}

impl MinHashFilter {
    pub fn new(threshold: f64) -> Self {
        Self { k: 128, seed: 0x5eed, threshold, margin: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoringOptions {
    pub workers: usize,
    pub minhash: Option<MinHashFilter>,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        Self { workers: 1, minhash: None }
    }
}

/// Scored pairs of one (group, metric), sorted by pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub group: ComparisonGroup,
    pub metric: Metric,
    pub scores: Vec<PairScore>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub pair: PairId,
    pub score: f64,
}

impl ScoreSet {
    pub fn new(group: ComparisonGroup, metric: Metric, mut scores: Vec<PairScore>) -> Self {
        scores.sort_by(|x, y| x.pair.cmp(&y.pair));
        Self { group, metric, scores }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.scores.iter().map(|s| s.score)
    }
}

fn score_pair(index: &ScoringIndex, pair: &PairId, metric: Metric, filter: Option<&MinHashFilter>) -> Result<Option<f64>, PairwiseError> {
    let (x, y) = (index.get(&pair.a)?, index.get(&pair.b)?);
    match metric {
        Metric::Jaccard => {
            if let (Some(f), Some(mx), Some(my)) = (filter, &x.minhash, &y.minhash) {
                if 100.0 * signature_agreement(mx, my) < f.threshold - f.margin {
                    return Ok(None);
                }
            }
            let ratio = jaccard_sorted(&x.tokens, &y.tokens).map_err(|_| PairwiseError::MissingDocument(
                if x.tokens.is_empty() { pair.a.clone() } else { pair.b.clone() },
            ))?;
            Ok(Some(ratio.score::<f64>().value()))
        }
        Metric::Ctph => {
            let hx = x.ctph.as_ref().ok_or_else(|| PairwiseError::MissingDigest(pair.a.clone()))?;
            let hy = y.ctph.as_ref().ok_or_else(|| PairwiseError::MissingDigest(pair.b.clone()))?;
            Ok(Some(f64::from(hx.score(hy))))
        }
    }
}

/// Score `pairs` under each metric on a pool of `options.workers` threads.
///
/// Results are collected in input order, so the output does not depend on
/// the worker count.
pub fn score_all(
    pairs: &[PairId],
    group: ComparisonGroup,
    index: &mut ScoringIndex,
    metrics: &[Metric],
    options: &ScoringOptions,
) -> Result<Vec<ScoreSet>, PairwiseError> {
    if let Some(f) = &options.minhash {
        if metrics.contains(&Metric::Jaccard) {
            index.with_minhash(&MinHasher::new(f.k, f.seed));
        }
    }
    let index: &ScoringIndex = index;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| PairwiseError::Pool(e.to_string()))?;

    let mut metrics = metrics.to_vec();
    metrics.sort();
    metrics.dedup();
    let mut out = Vec::with_capacity(metrics.len());
    for metric in metrics {
        let filter = options.minhash.as_ref().filter(|_| metric == Metric::Jaccard);
        let scored: Vec<Option<f64>> = pool.install(|| {
            pairs
                .par_iter()
                .with_min_len(256)
                .map(|p| score_pair(index, p, metric, filter))
                .collect::<Result<_, _>>()
        })?;
        let scores = pairs
            .iter()
            .zip(scored)
            .filter_map(|(p, s)| s.map(|score| PairScore { pair: p.clone(), score }))
            .collect();
        out.push(ScoreSet::new(group, metric, scores));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn repo(id: &str, eco: Ecosystem, dev: &str) -> RepoRecord {
        RepoRecord {
            repo_id: RepoId::new(id),
            ecosystem: eco,
            developer_key: dev.to_string(),
            source_url: format!("github.com/{dev}/{id}"),
            display_name: id.to_string(),
            local_path: PathBuf::from("/nonexistent"),
            languages: BTreeMap::new(),
            primary_language: "unknown".to_string(),
            tool_descriptions: Vec::new(),
        }
    }

    #[test]
    fn within_group_pairs() {
        let repos = [repo("c", Ecosystem::Mcp, "x"), repo("a", Ecosystem::Mcp, "y"), repo("b", Ecosystem::Mcp, "z")];
        let e = enumerate_pairs(&repos, ComparisonGroup::McpMcp, true);
        let ids: Vec<String> = e.pairs.iter().map(ToString::to_string).collect();
        assert_eq!(ids, ["a.b", "a.c", "b.c"]);
        assert_eq!(e.excluded_same_developer, 0);
        assert!(enumerate_pairs(&repos, ComparisonGroup::SkillsSkills, true).pairs.is_empty());
    }

    #[test]
    fn same_developer_pairs_are_excluded() {
        let repos = [repo("a", Ecosystem::Mcp, "dev"), repo("b", Ecosystem::Mcp, "dev")];
        let on = enumerate_pairs(&repos, ComparisonGroup::McpMcp, true);
        assert!(on.pairs.is_empty());
        assert_eq!(on.excluded_same_developer, 1);
        assert_eq!(enumerate_pairs(&repos, ComparisonGroup::McpMcp, false).pairs.len(), 1);
    }

    #[test]
    fn cross_group_is_bipartite_and_sorted() {
        let repos = [
            repo("m2", Ecosystem::Mcp, "a"),
            repo("m1", Ecosystem::Mcp, "b"),
            repo("s1", Ecosystem::Skills, "c"),
            repo("a0", Ecosystem::Skills, "d"),
            repo("s3", Ecosystem::Skills, "e"),
        ];
        let e = enumerate_pairs(&repos, ComparisonGroup::McpSkills, true);
        assert_eq!(e.pairs.len(), 6);
        assert!(e.pairs.windows(2).all(|w| w[0] < w[1]));
        assert!(e.pairs.iter().all(|p| p.a < p.b));
    }

    #[test]
    fn cross_group_exclusion_uses_developer_key() {
        let repos = [repo("m", Ecosystem::Mcp, "dev"), repo("s", Ecosystem::Skills, "dev")];
        let e = enumerate_pairs(&repos, ComparisonGroup::McpSkills, true);
        assert!(e.pairs.is_empty());
        assert_eq!(e.excluded_same_developer, 1);
    }

    #[test]
    fn pair_id_orders_and_rejects_self_pairs() {
        let p = PairId::new(RepoId::new("z"), RepoId::new("b")).unwrap();
        assert_eq!((p.a.as_str(), p.b.as_str()), ("b", "z"));
        assert!(PairId::new(RepoId::new("a"), RepoId::new("a")).is_none());
    }

    #[test]
    fn group_names_parse() {
        for g in ComparisonGroup::ALL {
            assert_eq!(g.as_str().parse::<ComparisonGroup>().unwrap(), g);
            assert_eq!(g.display_name().parse::<ComparisonGroup>().unwrap(), g);
        }
        assert!("mcp".parse::<ComparisonGroup>().is_err());
    }

    fn index_of(docs: &[(&str, &str)]) -> ScoringIndex {
        let mut index = ScoringIndex::new();
        for (id, text) in docs {
            let h = crate::metrics::ctph_digest(text.as_bytes()).unwrap();
            index.insert(RepoId::new(*id), crate::normalize::tokenize(text), Some(&h));
        }
        index
    }

    #[test]
    fn scores_every_pair_under_every_metric() {
        let mut index = index_of(&[("a", "x y z w"), ("b", "x y q"), ("c", "m n o p")]);
        let pairs: Vec<PairId> = ["a", "b", "c"]
            .iter()
            .enumerate()
            .flat_map(|(i, x)| ["a", "b", "c"][i + 1..].iter().map(move |y| PairId::new(RepoId::new(*x), RepoId::new(*y)).unwrap()))
            .collect();
        let sets = score_all(&pairs, ComparisonGroup::McpMcp, &mut index, &Metric::ALL, &ScoringOptions::default()).unwrap();
        assert_eq!(sets.iter().map(ScoreSet::len).sum::<usize>(), 6);
        let jac = sets.iter().find(|s| s.metric == Metric::Jaccard).unwrap();
        assert_eq!(jac.scores[0].score, 40.0);
        assert_eq!(jac.scores[1].score, 0.0);
    }

    #[test]
    fn missing_document_is_reported() {
        let mut index = index_of(&[("a", "x y")]);
        let pairs = [PairId::new(RepoId::new("a"), RepoId::new("b")).unwrap()];
        let err = score_all(&pairs, ComparisonGroup::McpMcp, &mut index, &[Metric::Jaccard], &ScoringOptions::default())
            .unwrap_err();
        assert!(matches!(err, PairwiseError::MissingDocument(id) if id.as_str() == "b"));
    }

    #[test]
    fn minhash_filter_keeps_high_pairs() {
        let shared: String = (0..200).map(|i| format!("t{i} ")).collect();
        let other: String = (0..200).map(|i| format!("u{i} ")).collect();
        let mut index = index_of(&[("a", &shared), ("b", &shared), ("c", &other)]);
        let pairs: Vec<PairId> = [("a", "b"), ("a", "c"), ("b", "c")]
            .iter()
            .map(|(x, y)| PairId::new(RepoId::new(*x), RepoId::new(*y)).unwrap())
            .collect();
        let opts = ScoringOptions { workers: 2, minhash: Some(MinHashFilter::new(80.0)) };
        let sets = score_all(&pairs, ComparisonGroup::McpMcp, &mut index, &Metric::ALL, &opts).unwrap();
        let jac = sets.iter().find(|s| s.metric == Metric::Jaccard).unwrap();
        assert_eq!(jac.len(), 1);
        assert_eq!(jac.scores[0].score, 100.0);
        assert_eq!(sets.iter().find(|s| s.metric == Metric::Ctph).unwrap().len(), 3);
    }
}
