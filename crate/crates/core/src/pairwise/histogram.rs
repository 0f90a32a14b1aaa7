use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::PairwiseError;

/// Score counts over equal-width bins spanning `[0, 100]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bin_width: f64) -> Result<Self, PairwiseError> {
        let bins = 100.0 / bin_width;
        if !(bin_width > 0.0 && bin_width <= 100.0) || (bins - bins.round()).abs() > 1e-9 {
            return Err(PairwiseError::InvalidBinWidth(bin_width));
        }
        Ok(Self { bin_width, counts: vec![0; bins.round() as usize] })
    }

    /// Edges are computed as `100 k / n` so each is the closest double to the
    /// decimal edge.
    pub fn edges(&self, k: usize) -> (f64, f64) {
        let n = self.counts.len() as f64;
        (100.0 * k as f64 / n, 100.0 * (k + 1) as f64 / n)
    }

    /// Bin of `score`: half-open `[lo, hi)`, except that 100 lands in the last bin.
    pub fn bin_of(&self, score: f64) -> usize {
        let last = self.counts.len() - 1;
        let mut k = ((score / self.bin_width).floor().max(0.0) as usize).min(last);
        // Division may land one bin off near an edge.
        if k < last && self.edges(k).1 <= score {
            k += 1;
        }
        if k > 0 && self.edges(k).0 > score {
            k -= 1;
        }
        k
    }

    pub fn add(&mut self, score: f64) {
        let k = self.bin_of(score);
        self.counts[k] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.edges(k);
            let _ = writeln!(out, "{lo},{hi},{c}");
        }
        out
    }
}

pub fn score_histogram<I>(scores: I, bin_width: f64) -> Result<Histogram, PairwiseError>
where
    I: IntoIterator<Item = f64>,
{
    let mut h = Histogram::new(bin_width)?;
    for s in scores {
        h.add(s);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn top_bin_is_closed() {
        let h = score_histogram([0.0, 50.0, 100.0], 50.0).unwrap();
        assert_eq!(h.counts, vec![1, 2]);
    }

    #[test]
    fn empty_input_gives_zero_bins() {
        let h = score_histogram([], 20.0).unwrap();
        assert_eq!(h.counts, vec![0; 5]);
        assert_eq!(h.to_csv().lines().nth(1), Some("0,20,0"));
    }

    #[test]
    fn invalid_widths_are_rejected() {
        for w in [0.0, -5.0, 30.0, 101.0, f64::NAN] {
            assert!(Histogram::new(w).is_err(), "{w}");
        }
        assert!(Histogram::new(0.1).is_ok());
    }

    #[test]
    fn fine_bins_respect_decimal_edges() {
        let h = Histogram::new(0.1).unwrap();
        assert_eq!(h.bin_of(0.3), 3);
        assert_eq!(h.bin_of(0.29999), 2);
        assert_eq!(h.bin_of(100.0), 999);
        let h = Histogram::new(1.0).unwrap();
        assert_eq!(h.bin_of(79.999), 79);
        assert_eq!(h.bin_of(80.0), 80);
    }

    proptest! {
        #[test]
        fn counts_sum_to_input_length(scores in prop::collection::vec(0.0f64..=100.0, 0..300), w in prop::sample::select(vec![1.0, 2.5, 5.0, 20.0, 50.0, 100.0])) {
            let h = score_histogram(scores.iter().copied(), w).unwrap();
            prop_assert_eq!(h.total(), scores.len() as u64);
        }
    }
}
