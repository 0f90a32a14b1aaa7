//! MinHash signatures, used only as an optional candidate pre-filter.

use super::MetricError;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A family of `k` seeded hash functions.
#[derive(Debug, Clone)]
pub struct MinHasher {
    seeds: Vec<u64>,
}

impl MinHasher {
    pub fn new(k: usize, seed: u64) -> Self {
        let seeds = (0..k as u64).map(|i| splitmix64(seed ^ splitmix64(i))).collect();
        Self { seeds }
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn signature<I, T>(&self, tokens: I) -> Result<Vec<u64>, MetricError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        if self.seeds.is_empty() {
            return Err(MetricError::EmptyInput("minhash signature length"));
        }
        let mut sig = vec![u64::MAX; self.seeds.len()];
        let mut seen = false;
        for token in tokens {
            seen = true;
            let base = fnv1a64(token.as_ref());
            for (slot, &seed) in sig.iter_mut().zip(&self.seeds) {
                let h = splitmix64(base ^ seed);
                if h < *slot {
                    *slot = h;
                }
            }
        }
        if !seen {
            return Err(MetricError::EmptyInput("minhash"));
        }
        Ok(sig)
    }
}

/// Signature of length `k` under the default seed.
pub fn minhash_signature<I, T>(tokens: I, k: usize) -> Result<Vec<u64>, MetricError>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    MinHasher::new(k, 0x5eed).signature(tokens)
}

/// Fraction of positions where two signatures agree; estimates Jaccard / 100.
pub fn signature_agreement(a: &[u64], b: &[u64]) -> f64 {
    if a.is_empty() || a.len() != b.len() {
        return 0.0;
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same as f64 / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_identical_signatures() {
        let a = minhash_signature(["x", "y", "z"], 64).unwrap();
        let b = minhash_signature(["z", "y", "x"], 64).unwrap();
        assert_eq!(a, b);
        assert_eq!(signature_agreement(&a, &b), 1.0);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(minhash_signature(Vec::<&str>::new(), 8).is_err());
        assert!(minhash_signature(["a"], 0).is_err());
    }

    #[test]
    fn disjoint_sets_rarely_agree() {
        // Monte-Carlo over seeds: the expected agreement of disjoint sets is 0.
        let mut total = 0.0;
        for seed in 0..20u64 {
            let h = MinHasher::new(128, seed);
            let a = h.signature((0..50).map(|i| format!("a{i}"))).unwrap();
            let b = h.signature((0..50).map(|i| format!("b{i}"))).unwrap();
            total += signature_agreement(&a, &b);
        }
        assert!(total / 20.0 < 0.01, "mean agreement {}", total / 20.0);
    }

    #[test]
    fn estimator_concentrates_on_true_jaccard() {
        // True Jaccard of {a,b,c} and {b,c,d} is 2/4.
        let a = minhash_signature(["a", "b", "c"], 1024).unwrap();
        let b = minhash_signature(["b", "c", "d"], 1024).unwrap();
        let est = signature_agreement(&a, &b);
        assert!((est - 0.5).abs() <= 0.05, "estimate {est}");
    }
}
