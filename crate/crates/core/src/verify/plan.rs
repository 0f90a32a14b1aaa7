use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::VerifyError;
use crate::analysis::{Bucket, BucketEdges};
use crate::metrics::Metric;
use crate::pairwise::{ComparisonGroup, PairId, ScoreSet};

pub const DEFAULT_PER_BUCKET: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPair {
    pub id: String,
    pub a: crate::corpus::RepoId,
    pub b: crate::corpus::RepoId,
    pub score: f64,
}

impl SampledPair {
    pub fn pair(&self) -> PairId {
        PairId { a: self.a.clone(), b: self.b.clone() }
    }
}

/// `<metric>.<a>.<b>`, the identifier used by the review API.
pub fn sample_id(metric: Metric, pair: &PairId) -> String {
    format!("{metric}.{pair}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub metric: Metric,
    pub group: ComparisonGroup,
    pub bucket: usize,
    pub range: Bucket,
    pub total: u64,
    pub pairs: Vec<SampledPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub per_bucket: usize,
    pub edges: BucketEdges,
    pub strata: Vec<Stratum>,
    #[serde(skip)]
    index: HashMap<String, (usize, usize)>,
}

/// Where a sampled pair sits in the plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry<'a> {
    pub stratum: &'a Stratum,
    pub pair: &'a SampledPair,
}

fn stratum_seed(seed: u64, metric: Metric, group: ComparisonGroup, bucket: usize) -> u64 {
    let digest = Sha256::digest(format!("{seed}:{metric}:{group}:{bucket}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

impl SamplePlan {
    fn build_index(&mut self) {
        self.index = self
            .strata
            .iter()
            .enumerate()
            .flat_map(|(s, st)| st.pairs.iter().enumerate().map(move |(p, sp)| (sp.id.clone(), (s, p))))
            .collect();
    }

    pub fn get(&self, id: &str) -> Option<PlanEntry<'_>> {
        let &(s, p) = self.index.get(id)?;
        Some(PlanEntry { stratum: &self.strata[s], pair: &self.strata[s].pairs[p] })
    }

    pub fn stratum(&self, metric: Metric, group: ComparisonGroup, bucket: usize) -> Option<&Stratum> {
        self.strata.iter().find(|s| s.metric == metric && s.group == group && s.bucket == bucket)
    }

    pub fn sampled_count(&self) -> usize {
        self.strata.iter().map(|s| s.pairs.len()).sum()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), VerifyError> {
        fs::write(path, self.to_json()).map_err(|e| VerifyError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, VerifyError> {
        let text = fs::read_to_string(path).map_err(|e| VerifyError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let mut plan: Self = serde_json::from_str(text).map_err(|e| VerifyError::Parse(e.to_string()))?;
        plan.build_index();
        Ok(plan)
    }
}

/// Uniform sample without replacement of `min(per_bucket, size)` pairs from
/// every (metric, group, bucket) stratum.
///
/// Each stratum draws from its own generator seeded from `seed` and the
/// stratum key, over the pairs in ascending order. Sampled pairs are listed
/// in that same order.
pub fn stratified_sample(sets: &[ScoreSet], edges: &BucketEdges, per_bucket: usize, seed: u64) -> Result<SamplePlan, VerifyError> {
    if per_bucket == 0 {
        return Err(VerifyError::InvalidPlan("per_bucket must be at least 1".into()));
    }
    let mut sets: Vec<&ScoreSet> = sets.iter().collect();
    sets.sort_by_key(|s| (s.metric, s.group));
    let mut strata = Vec::new();
    for set in sets {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
        for (i, s) in set.scores.iter().enumerate() {
            let b = edges.index_of(s.score).ok_or_else(|| VerifyError::InvalidPlan(format!("score {} outside [0, 100]", s.score)))?;
            members[b].push(i);
        }
        for (bucket, mut idx) in members.into_iter().enumerate() {
            idx.sort_by(|&x, &y| set.scores[x].pair.cmp(&set.scores[y].pair));
            let total = idx.len() as u64;
            let chosen: Vec<usize> = if idx.len() <= per_bucket {
                idx
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(stratum_seed(seed, set.metric, set.group, bucket));
                let mut picks = index::sample(&mut rng, idx.len(), per_bucket).into_vec();
                picks.sort_unstable();
                picks.into_iter().map(|k| idx[k]).collect()
            };
            let pairs = chosen
                .into_iter()
                .map(|i| {
                    let s = &set.scores[i];
                    SampledPair { id: sample_id(set.metric, &s.pair), a: s.pair.a.clone(), b: s.pair.b.clone(), score: s.score }
                })
                .collect();
            strata.push(Stratum { metric: set.metric, group: set.group, bucket, range: edges.bucket(bucket), total, pairs });
        }
    }
    let mut plan = SamplePlan { seed, per_bucket, edges: edges.clone(), strata, index: HashMap::new() };
    plan.build_index();
    Ok(plan)
}
