//! Context-triggered piecewise hashing, output-compatible with ssdeep.
//!
//! A digest is rendered as `blocksize:sig_lo:sig_hi`, where `sig_lo` was
//! produced at `blocksize` and `sig_hi` at twice that.

mod compare;
mod digest;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricError;

pub use compare::{ctph_compare, ctph_compare_str, PreparedHash};
pub use digest::{ctph_digest, CtphHasher, MAX_INPUT_LEN};

pub(crate) const MIN_BLOCK_SIZE: u32 = 3;
pub(crate) const SIGNATURE_LEN: usize = 64;
pub(crate) const NUM_BLOCK_SIZES: usize = 31;
pub(crate) const B64: &[u8; 64] =
    b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

#[inline]
pub(crate) fn block_size_at(index: usize) -> u32 {
    MIN_BLOCK_SIZE << index
}

fn is_block_size(bs: u32) -> bool {
    bs >= MIN_BLOCK_SIZE && bs.is_multiple_of(MIN_BLOCK_SIZE) && (bs / MIN_BLOCK_SIZE).is_power_of_two()
}

/// A CTPH digest.
///
/// Signatures are kept exactly as generated; runs of repeated symbols are
/// collapsed only when two digests are compared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FuzzyHash {
    block_size: u32,
    sig_lo: Vec<u8>,
    sig_hi: Vec<u8>,
}

impl FuzzyHash {
    pub(crate) fn from_parts_unchecked(block_size: u32, sig_lo: Vec<u8>, sig_hi: Vec<u8>) -> Self {
        debug_assert!(is_block_size(block_size));
        debug_assert!(sig_lo.len() <= SIGNATURE_LEN && sig_hi.len() <= SIGNATURE_LEN / 2);
        Self { block_size, sig_lo, sig_hi }
    }

    pub fn new(block_size: u32, sig_lo: &str, sig_hi: &str) -> Result<Self, MetricError> {
        if !is_block_size(block_size) {
            return Err(MetricError::Format(format!("invalid block size {block_size}")));
        }
        for (name, sig, max) in [("sig_lo", sig_lo, SIGNATURE_LEN), ("sig_hi", sig_hi, SIGNATURE_LEN)] {
            if sig.len() > max {
                return Err(MetricError::Format(format!("{name} longer than {max} symbols")));
            }
            if let Some(bad) = sig.bytes().find(|b| !B64.contains(b)) {
                return Err(MetricError::Format(format!(
                    "{name} contains non-base64 symbol {:?}",
                    char::from(bad)
                )));
            }
        }
        Ok(Self {
            block_size,
            sig_lo: sig_lo.as_bytes().to_vec(),
            sig_hi: sig_hi.as_bytes().to_vec(),
        })
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }

    pub fn sig_lo(&self) -> &str {
        // Alphabet is validated on construction.
        std::str::from_utf8(&self.sig_lo).unwrap_or_default()
    }

    pub fn sig_hi(&self) -> &str {
        std::str::from_utf8(&self.sig_hi).unwrap_or_default()
    }
}

impl fmt::Display for FuzzyHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.block_size, self.sig_lo(), self.sig_hi())
    }
}

impl FromStr for FuzzyHash {
    type Err = MetricError;

    /// Accepts `bs:lo:hi`, optionally followed by `,"filename"` as written
    /// by the ssdeep command line tool.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.split(',').next().unwrap_or_default();
        let mut parts = s.splitn(3, ':');
        let (Some(bs), Some(lo), Some(hi)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(MetricError::Format(format!("expected blocksize:sig:sig, got {s:?}")));
        };
        let bs: u32 = bs
            .parse()
            .map_err(|_| MetricError::Format(format!("invalid block size {bs:?}")))?;
        Self::new(bs, lo, hi)
    }
}

impl Serialize for FuzzyHash {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FuzzyHash {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
