use super::digest::ROLLING_WINDOW;
use super::{FuzzyHash, MIN_BLOCK_SIZE, SIGNATURE_LEN};
use crate::metrics::{MetricError, SimilarityScore};
use crate::scalar::Scalar;

/// Drop every symbol that would extend a run beyond three.
fn eliminate_runs(sig: &[u8]) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::with_capacity(sig.len());
    for &c in sig {
        let n = out.len();
        if n >= 3 && out[n - 1] == c && out[n - 2] == c && out[n - 3] == c {
            continue;
        }
        out.push(c);
    }
    out
}

/// Every window of `ROLLING_WINDOW` symbols packed losslessly into a u64
/// (6 bits per symbol), sorted and deduplicated.
fn window_codes(sig: &[u8]) -> Vec<u64> {
    if sig.len() < ROLLING_WINDOW {
        return Vec::new();
    }
    let mut codes: Vec<u64> = sig
        .windows(ROLLING_WINDOW)
        .map(|w| w.iter().fold(0u64, |acc, &c| (acc << 6) | u64::from(symbol_value(c))))
        .collect();
    codes.sort_unstable();
    codes.dedup();
    codes
}

#[inline]
fn symbol_value(c: u8) -> u8 {
    match c {
        b'A'..=b'Z' => c - b'A',
        b'a'..=b'z' => c - b'a' + 26,
        b'0'..=b'9' => c - b'0' + 52,
        b'+' => 62,
        _ => 63,
    }
}

fn sorted_intersect(a: &[u64], b: &[u64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Levenshtein distance with insert/delete cost 1 and substitution cost 2.
pub(crate) fn weighted_edit_distance(a: &[u8], b: &[u8]) -> u32 {
    let mut prev: Vec<u32> = (0..=b.len() as u32).collect();
    let mut cur = vec![0u32; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i as u32 + 1;
        for (j, &cb) in b.iter().enumerate() {
            let insert = prev[j + 1] + 1;
            let delete = cur[j] + 1;
            let replace = prev[j] + if ca == cb { 0 } else { 2 };
            cur[j + 1] = insert.min(delete).min(replace);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone)]
struct PreparedSig {
    symbols: Vec<u8>,
    windows: Vec<u64>,
}

impl PreparedSig {
    fn new(raw: &[u8]) -> Self {
        let symbols = eliminate_runs(raw);
        let windows = window_codes(&symbols);
        Self { symbols, windows }
    }

    fn score_against(&self, other: &Self, block_size: u32) -> u32 {
        let (l1, l2) = (self.symbols.len() as u32, other.symbols.len() as u32);
        if (l1 as usize) < ROLLING_WINDOW || (l2 as usize) < ROLLING_WINDOW {
            return 0;
        }
        // At least one common substring of window length is required.
        if !sorted_intersect(&self.windows, &other.windows) {
            return 0;
        }
        let dist = weighted_edit_distance(&self.symbols, &other.symbols);
        let scaled = dist * SIGNATURE_LEN as u32 / (l1 + l2);
        let score = 100 - (100 * scaled) / SIGNATURE_LEN as u32;

        // Small block sizes must not exaggerate the match.
        let uncapped_from = (99 + ROLLING_WINDOW as u32) / ROLLING_WINDOW as u32 * MIN_BLOCK_SIZE;
        if block_size >= uncapped_from {
            return score;
        }
        score.min(block_size / MIN_BLOCK_SIZE * l1.min(l2))
    }
}

/// A digest with run-collapsed signatures and precomputed window sets,
/// for repeated comparison.
#[derive(Debug, Clone)]
pub struct PreparedHash {
    block_size: u32,
    lo: PreparedSig,
    hi: PreparedSig,
}

impl PreparedHash {
    pub fn new(hash: &FuzzyHash) -> Self {
        Self {
            block_size: hash.block_size(),
            lo: PreparedSig::new(&hash.sig_lo),
            hi: PreparedSig::new(&hash.sig_hi),
        }
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    /// Integer similarity in `0..=100`.
    pub fn score(&self, other: &Self) -> u32 {
        let (b1, b2) = (self.block_size, other.block_size);
        if b1 == b2 {
            if self.lo.symbols == other.lo.symbols && self.hi.symbols == other.hi.symbols {
                return 100;
            }
            let lo = self.lo.score_against(&other.lo, b1);
            let hi = self.hi.score_against(&other.hi, b1.saturating_mul(2));
            lo.max(hi)
        } else if b1.checked_mul(2) == Some(b2) {
            other.lo.score_against(&self.hi, b2)
        } else if b2.checked_mul(2) == Some(b1) {
            self.lo.score_against(&other.hi, b1)
        } else {
            0
        }
    }
}

/// Similarity of two digests on the `[0, 100]` scale.
pub fn ctph_compare<S: Scalar>(a: &FuzzyHash, b: &FuzzyHash) -> SimilarityScore<S> {
    let score = PreparedHash::new(a).score(&PreparedHash::new(b));
    SimilarityScore::from_percent_u32(score)
}

/// Compare two digests given in their textual form.
pub fn ctph_compare_str<S: Scalar>(a: &str, b: &str) -> Result<SimilarityScore<S>, MetricError> {
    Ok(ctph_compare(&a.parse()?, &b.parse()?))
}
