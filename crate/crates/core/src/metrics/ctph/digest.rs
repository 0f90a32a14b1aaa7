//! Streaming CTPH generator.
//!
//! All candidate block sizes `3 * 2^i` are tracked in a single pass. A
//! block-size context is forked from its predecessor the first time the
//! predecessor emits a piece (before that moment both would carry the same
//! state), and the smallest context is retired once it can no longer be
//! selected for the final digest. Output is identical to running the
//! classic one-block-size-at-a-time algorithm with retries.

use super::{block_size_at, FuzzyHash, B64, MIN_BLOCK_SIZE, NUM_BLOCK_SIZES, SIGNATURE_LEN};
use crate::metrics::MetricError;

pub(super) const ROLLING_WINDOW: usize = 7;
const HASH_INIT: u8 = 0x27;
const HALF_LEN: usize = SIGNATURE_LEN / 2;

/// Largest input accepted, in bytes.
pub const MAX_INPUT_LEN: u64 = u32::MAX as u64;

/// Adler-style rolling hash over the last seven bytes.
#[derive(Debug, Clone, Default)]
pub(super) struct RollingHash {
    window: [u8; ROLLING_WINDOW],
    h1: u32,
    h2: u32,
    h3: u32,
    n: usize,
}

impl RollingHash {
    #[inline]
    pub(super) fn push(&mut self, c: u8) {
        let c32 = u32::from(c);
        self.h2 = self.h2.wrapping_sub(self.h1);
        self.h2 = self.h2.wrapping_add(ROLLING_WINDOW as u32 * c32);
        self.h1 = self.h1.wrapping_add(c32);
        self.h1 = self.h1.wrapping_sub(u32::from(self.window[self.n]));
        self.window[self.n] = c;
        self.n += 1;
        if self.n == ROLLING_WINDOW {
            self.n = 0;
        }
        self.h3 = (self.h3 << 5) ^ c32;
    }

    #[inline]
    pub(super) fn sum(&self) -> u32 {
        self.h1.wrapping_add(self.h2).wrapping_add(self.h3)
    }
}

/// Low six bits of a 32-bit FNV step (`h * 0x01000193 ^ c`). Only the low
/// six bits ever reach the signature, and they depend only on the low six
/// bits of the previous state.
#[inline]
fn piece_hash(h: u8, c: u8) -> u8 {
    (h.wrapping_mul(0x93) ^ c) & 0x3f
}

#[derive(Debug, Clone, Copy)]
struct BlockContext {
    digest: [u8; SIGNATURE_LEN],
    /// Number of finished symbols; `digest[len]` holds the running tail
    /// symbol once the signature is full.
    len: usize,
    half_tail: u8,
    h: u8,
    half_h: u8,
}

impl BlockContext {
    const EMPTY: Self = Self {
        digest: [0; SIGNATURE_LEN],
        len: 0,
        half_tail: 0,
        h: HASH_INIT,
        half_h: HASH_INIT,
    };

    fn forked_from(parent: &Self) -> Self {
        Self {
            h: parent.h,
            half_h: parent.half_h,
            ..Self::EMPTY
        }
    }
}

/// Incremental CTPH state. Feed bytes with [`CtphHasher::update`] and call
/// [`CtphHasher::finish`] once.
#[derive(Debug, Clone)]
pub struct CtphHasher {
    total_len: u64,
    reduce_border: u64,
    start: usize,
    end: usize,
    blocks: [BlockContext; NUM_BLOCK_SIZES],
    roll: RollingHash,
}

impl Default for CtphHasher {
    fn default() -> Self {
        Self::new()
    }
}

impl CtphHasher {
    pub fn new() -> Self {
        Self {
            total_len: 0,
            reduce_border: u64::from(MIN_BLOCK_SIZE) * SIGNATURE_LEN as u64,
            start: 0,
            end: 1,
            blocks: [BlockContext::EMPTY; NUM_BLOCK_SIZES],
            roll: RollingHash::default(),
        }
    }

    pub fn update(&mut self, data: &[u8]) {
        self.total_len = self.total_len.saturating_add(data.len() as u64);
        for &c in data {
            self.step(c);
        }
    }

    fn step(&mut self, c: u8) {
        self.roll.push(c);
        let sum = self.roll.sum();
        for block in &mut self.blocks[self.start..self.end] {
            block.h = piece_hash(block.h, c);
            block.half_h = piece_hash(block.half_h, c);
        }

        let mut i = self.start;
        while i < self.end {
            let bs = block_size_at(i);
            if sum % bs != bs - 1 {
                break;
            }
            if self.blocks[i].len == 0 {
                self.try_fork();
            }
            let block = &mut self.blocks[i];
            block.digest[block.len] = B64[usize::from(block.h)];
            block.half_tail = B64[usize::from(block.half_h)];
            if block.len < SIGNATURE_LEN - 1 {
                // Only the last piece may absorb the remainder, so the
                // piece hash is reset only while there is room left.
                block.len += 1;
                block.digest[block.len] = 0;
                block.h = HASH_INIT;
                if block.len < HALF_LEN {
                    block.half_h = HASH_INIT;
                    block.half_tail = 0;
                }
            } else {
                self.try_reduce();
            }
            i += 1;
        }
    }

    fn try_fork(&mut self) {
        if self.end < NUM_BLOCK_SIZES {
            self.blocks[self.end] = BlockContext::forked_from(&self.blocks[self.end - 1]);
            self.end += 1;
        }
    }

    fn try_reduce(&mut self) {
        if self.end - self.start < 2 {
            return;
        }
        if self.reduce_border >= self.total_len {
            return;
        }
        if self.blocks[self.start + 1].len < HALF_LEN {
            return;
        }
        self.start += 1;
        self.reduce_border *= 2;
    }

    pub fn finish(&self) -> Result<FuzzyHash, MetricError> {
        if self.total_len == 0 {
            return Err(MetricError::EmptyInput("ctph digest"));
        }
        if self.total_len > MAX_INPUT_LEN {
            return Err(MetricError::InputTooLarge(self.total_len));
        }
        let roll_sum = self.roll.sum();

        let mut bi = self.start;
        while u64::from(block_size_at(bi)) * (SIGNATURE_LEN as u64) < self.total_len {
            bi += 1;
        }
        if bi >= self.end {
            bi = self.end - 1;
        }
        while bi > self.start && self.blocks[bi].len < HALF_LEN {
            bi -= 1;
        }

        let lo_block = &self.blocks[bi];
        let mut sig_lo = lo_block.digest[..lo_block.len].to_vec();
        if roll_sum != 0 {
            sig_lo.push(B64[usize::from(lo_block.h)]);
        } else if lo_block.digest[lo_block.len] != 0 {
            sig_lo.push(lo_block.digest[lo_block.len]);
        }

        let mut sig_hi = Vec::with_capacity(HALF_LEN);
        if bi + 1 < self.end {
            let hi_block = &self.blocks[bi + 1];
            let n = hi_block.len.min(HALF_LEN - 1);
            sig_hi.extend_from_slice(&hi_block.digest[..n]);
            if roll_sum != 0 {
                sig_hi.push(B64[usize::from(hi_block.half_h)]);
            } else if hi_block.half_tail != 0 {
                sig_hi.push(hi_block.half_tail);
            }
        } else if roll_sum != 0 {
            // Only reachable for the smallest block size, since inputs are
            // capped well below the largest one.
            sig_hi.push(B64[usize::from(lo_block.h)]);
        }

        Ok(FuzzyHash::from_parts_unchecked(
            block_size_at(bi),
            sig_lo,
            sig_hi,
        ))
    }
}

/// Digest a whole byte stream.
pub fn ctph_digest(stream: &[u8]) -> Result<FuzzyHash, MetricError> {
    let mut hasher = CtphHasher::new();
    hasher.update(stream);
    hasher.finish()
}
