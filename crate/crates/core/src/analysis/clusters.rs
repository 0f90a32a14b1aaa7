use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::RepoId;
use crate::metrics::Metric;
use crate::pairwise::{ComparisonGroup, PairId, ScoreSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub pair: PairId,
    pub score: f64,
}

/// Pairs scoring at least `threshold`, highest score first, ties by pair.
pub fn extract_candidates(set: &ScoreSet, threshold: f64) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = set
        .scores
        .iter()
        .filter(|s| s.score >= threshold)
        .map(|s| Candidate { pair: s.pair.clone(), score: s.score })
        .collect();
    out.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.pair.cmp(&y.pair)));
    out
}

/// Disjoint-set forest with path compression and union by rank.
#[derive(Debug, Clone, Default)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn push(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.rank.push(0);
        self.parent.len() - 1
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false when `x` and `y` were already joined.
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        match self.rank[rx].cmp(&self.rank[ry]) {
            std::cmp::Ordering::Less => self.parent[rx] = ry,
            std::cmp::Ordering::Greater => self.parent[ry] = rx,
            std::cmp::Ordering::Equal => {
                self.parent[ry] = rx;
                self.rank[rx] += 1;
            }
        }
        true
    }
}

/// Connected components of the candidate graph. Members are sorted; clusters
/// are ordered by descending size, then by smallest member.
pub fn cluster_candidates<'a, I>(pairs: I) -> Vec<Vec<RepoId>>
where
    I: IntoIterator<Item = &'a PairId>,
{
    let mut index: HashMap<&RepoId, usize> = HashMap::new();
    let mut ids: Vec<&RepoId> = Vec::new();
    let mut uf = UnionFind::new(0);
    let mut node = |id: &'a RepoId, uf: &mut UnionFind| {
        *index.entry(id).or_insert_with(|| {
            ids.push(id);
            uf.push()
        })
    };
    let mut edges = Vec::new();
    for p in pairs {
        let (x, y) = (node(&p.a, &mut uf), node(&p.b, &mut uf));
        edges.push((x, y));
    }
    for (x, y) in edges {
        uf.union(x, y);
    }
    let mut groups: BTreeMap<usize, Vec<RepoId>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let root = uf.find(i);
        groups.entry(root).or_default().push((*id).clone());
    }
    let mut clusters: Vec<Vec<RepoId>> = groups
        .into_values()
        .map(|mut members| {
            members.sort();
            members
        })
        .collect();
    clusters.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x[0].cmp(&y[0])));
    clusters
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceReport {
    pub metric: Metric,
    pub group: ComparisonGroup,
    pub threshold: f64,
    pub candidate_pairs: usize,
    pub repos_involved: usize,
    pub largest_cluster: usize,
    pub clusters: usize,
}

pub fn prevalence_report(candidates: &[Candidate], metric: Metric, group: ComparisonGroup, threshold: f64) -> PrevalenceReport {
    let clusters = cluster_candidates(candidates.iter().map(|c| &c.pair));
    PrevalenceReport {
        metric,
        group,
        threshold,
        candidate_pairs: candidates.len(),
        repos_involved: clusters.iter().map(Vec::len).sum(),
        largest_cluster: clusters.first().map_or(0, Vec::len),
        clusters: clusters.len(),
    }
}
