//! Two-universal hashing of biased 8-bit samples and the merged-number attack.
//!
//! A [`HashMatrix`] maps `cols` input bits to `rows` output bits by a GF(2)
//! matrix-vector product. The default 4x8 shape turns each 8-bit sample into
//! a 4-bit nibble; two consecutive nibbles are merged into one output byte,
//! high nibble first. A 16x32 block shape hashes four samples at a time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{stream, Domain};
use crate::{Error, Result};

/// Row-major GF(2) matrix. Row `i` is stored as a mask over the input word,
/// where column 0 is the most significant input bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_masks: Vec<u64>,
    pub seed: u64,
    /// Index of the candidate drawn from the seeded stream.
    pub candidate: u64,
}

impl HashMatrix {
    pub const DEFAULT_ROWS: usize = 4;
    pub const DEFAULT_COLS: usize = 8;

    pub fn from_rows(rows: usize, cols: usize, row_masks: Vec<u64>) -> Result<Self> {
        check_shape(rows, cols)?;
        if row_masks.len() != rows {
            return Err(Error::InvalidMatrix(format!("expected {rows} rows, got {}", row_masks.len())));
        }
        let limit = col_mask(cols);
        if row_masks.iter().any(|&m| m & !limit != 0) {
            return Err(Error::InvalidMatrix(format!("row mask wider than {cols} columns")));
        }
        Ok(Self { rows, cols, row_masks, seed: 0, candidate: 0 })
    }

    /// Matrix with the top `rows x rows` block set to the identity.
    pub fn identity_embedded(rows: usize, cols: usize) -> Result<Self> {
        check_shape(rows, cols)?;
        Self::from_rows(rows, cols, (0..rows).map(|i| 1u64 << (cols - 1 - i)).collect())
    }

    /// Candidate `candidate` of the uniformly random matrices under `seed`.
    pub fn random_candidate(rows: usize, cols: usize, seed: u64, candidate: u64) -> Result<Self> {
        check_shape(rows, cols)?;
        let mut rng = stream(seed, Domain::HashMatrix, candidate);
        let limit = col_mask(cols);
        let row_masks = (0..rows).map(|_| rng.random::<u64>() & limit).collect();
        Ok(Self { rows, cols, row_masks, seed, candidate })
    }

    /// A uniformly random matrix drawn from `seed`.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        Self::random_candidate(rows, cols, seed, 0)
    }

    /// Draws candidates from `seed` and keeps the first full-rank one whose
    /// output bias on samples distributed as `source_pmf` is at most
    /// `tolerance`, or the least biased full-rank one among
    /// `max_candidates`. Returns the matrix and its bias.
    pub fn screened(
        rows: usize,
        cols: usize,
        seed: u64,
        source_pmf: &[f64],
        tolerance: f64,
        max_candidates: u64,
    ) -> Result<(Self, f64)> {
        let source = SampleSpectrum::new(source_pmf)?;
        let mut best: Option<(Self, f64)> = None;
        for c in 0..max_candidates.max(1) {
            let m = Self::random_candidate(rows, cols, seed, c)?;
            if m.rank() < rows {
                continue;
            }
            let bias = m.output_bias(&source)?;
            if bias <= tolerance {
                return Ok((m, bias));
            }
            if best.as_ref().is_none_or(|(_, b)| bias < *b) {
                best = Some((m, bias));
            }
        }
        best.ok_or_else(|| Error::InvalidMatrix("no full-rank candidate found".into()))
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut rows = self.row_masks.clone();
        let mut rank = 0;
        for bit in (0..self.cols).rev() {
            let pivot = 1u64 << bit;
            if let Some(i) = (rank..rows.len()).find(|&i| rows[i] & pivot != 0) {
                rows.swap(rank, i);
                for j in 0..rows.len() {
                    if j != rank && rows[j] & pivot != 0 {
                        rows[j] ^= rows[rank];
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    /// GF(2) product with an input word of `cols` bits. Row 0 produces the
    /// most significant output bit.
    pub fn apply(&self, input: u64) -> u64 {
        self.row_masks.iter().fold(0u64, |acc, &row| (acc << 1) | ((row & input).count_ones() as u64 & 1))
    }

    /// Root of the summed squared biases of all non-trivial output parities
    /// for independent 8-bit samples drawn from `source`. Zero for a perfect
    /// extractor; a chi-square test over `N` outputs has mean excess
    /// `N * bias²`.
    pub fn output_bias(&self, source: &SampleSpectrum) -> Result<f64> {
        if !self.cols.is_multiple_of(8) || self.rows > 20 {
            return Err(Error::InvalidMatrix(format!(
                "bias needs whole 8-bit samples and at most 20 rows, got {}x{}",
                self.rows, self.cols
            )));
        }
        let samples = self.cols / 8;
        let mut total = 0.0;
        for selector in 1u64..(1u64 << self.rows) {
            let mut mask = 0u64;
            for (i, &row) in self.row_masks.iter().enumerate() {
                if selector >> (self.rows - 1 - i) & 1 == 1 {
                    mask ^= row;
                }
            }
            let bias: f64 = (0..samples).map(|s| source.bias((mask >> (8 * (samples - 1 - s))) as u8)).product();
            total += bias * bias;
        }
        Ok(total.sqrt())
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 || cols > 64 || rows > 64 {
        return Err(Error::InvalidMatrix(format!("unsupported shape {rows}x{cols}")));
    }
    Ok(())
}

fn col_mask(cols: usize) -> u64 {
    if cols == 64 {
        u64::MAX
    } else {
        (1u64 << cols) - 1
    }
}

/// Walsh spectrum of an 8-bit sample distribution: `bias(v)` is
/// `E[(-1)^popcount(v & x)]`.
#[derive(Debug, Clone)]
pub struct SampleSpectrum {
    bias: Vec<f64>,
}

impl SampleSpectrum {
    pub fn new(pmf: &[f64]) -> Result<Self> {
        if pmf.len() != 256 {
            return Err(Error::DimensionMismatch { expected: 256, actual: pmf.len() });
        }
        let mut b = pmf.to_vec();
        let mut h = 1;
        while h < 256 {
            for i in (0..256).step_by(2 * h) {
                for j in i..i + h {
                    let (x, y) = (b[j], b[j + h]);
                    b[j] = x + y;
                    b[j + h] = x - y;
                }
            }
            h *= 2;
        }
        Ok(Self { bias: b })
    }

    pub fn bias(&self, mask: u8) -> f64 {
        self.bias[mask as usize]
    }
}

/// Hashes one 8-bit sample with a `rows x 8` matrix.
pub fn hash_sample(bin: u8, m: &HashMatrix) -> Result<u8> {
    if m.cols != 8 {
        return Err(Error::DimensionMismatch { expected: m.cols, actual: 8 });
    }
    Ok(m.apply(bin as u64) as u8)
}

/// Hashes `cols / 8` consecutive samples, first sample in the high byte.
pub fn hash_block(samples: &[u8], m: &HashMatrix) -> Result<u64> {
    if samples.len() * 8 != m.cols {
        return Err(Error::DimensionMismatch { expected: m.cols, actual: samples.len() * 8 });
    }
    let word = samples.iter().fold(0u64, |acc, &s| (acc << 8) | s as u64);
    Ok(m.apply(word))
}

/// `h1` in the high nibble, `h2` in the low nibble.
pub fn merge_pair(h1: u8, h2: u8) -> u8 {
    ((h1 & 0x0f) << 4) | (h2 & 0x0f)
}

pub fn split_merged(v: u8) -> (u8, u8) {
    (v >> 4, v & 0x0f)
}

/// Extracts merged bytes from 8-bit samples.
///
/// Matrices must produce a multiple of 4 output bits per block; the outputs
/// are cut into nibbles and consecutive nibbles are merged. Trailing samples
/// that do not fill a block, and a trailing unpaired nibble, are dropped.
pub fn extract(samples: &[u8], m: &HashMatrix) -> Result<Vec<u8>> {
    if !m.cols.is_multiple_of(8) || !m.rows.is_multiple_of(4) {
        return Err(Error::InvalidMatrix(format!(
            "extraction needs whole samples in and whole nibbles out, got {}x{}",
            m.rows, m.cols
        )));
    }
    let per_block = m.cols / 8;
    let nibbles_per_block = m.rows / 4;
    let mut nibbles = Vec::with_capacity(samples.len() / per_block * nibbles_per_block);
    for block in samples.chunks_exact(per_block) {
        let h = hash_block(block, m)?;
        for k in (0..nibbles_per_block).rev() {
            nibbles.push(((h >> (4 * k)) & 0x0f) as u8);
        }
    }
    Ok(nibbles.chunks_exact(2).map(|p| merge_pair(p[0], p[1])).collect())
}

/// Expands bytes into bits, most significant bit first.
pub fn unpack_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1)).collect()
}

/// Packs bits into bytes, most significant bit first; a partial final byte is
/// zero-padded.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)))).collect()
}

/// Rank of the pair `(a, b)` when all pairs `(i, j)` are guessed in order of
/// decreasing `p[i] * q[j]`, lexicographically smaller pairs first on ties.
pub fn pair_rank(p: &[f64], q: &[f64], a: usize, b: usize) -> Result<u64> {
    for (v, k) in [(p, a), (q, b)] {
        if k >= v.len() {
            return Err(Error::BinOutOfRange { index: k, bin_count: v.len() });
        }
    }
    let target = p[a] * q[b];
    let mut sorted = q.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut better = 0u64;
    for (i, &pi) in p.iter().enumerate() {
        let greater = sorted.partition_point(|&qj| pi * qj > target);
        better += greater as u64;
        if i > a {
            continue;
        }
        let equal = sorted.partition_point(|&qj| pi * qj >= target) - greater;
        if equal == 0 {
            continue;
        }
        if i < a {
            better += equal as u64;
        } else {
            better += q[..b].iter().filter(|&&qj| pi * qj == target).count() as u64;
        }
    }
    Ok(better + 1)
}

/// Mean guesses over a run of consecutive-shot pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergedGuessSummary {
    pub pairs: u64,
    /// Guessing the pair of biased samples with Eve's conditional predictions.
    pub g_ind: f64,
    /// Ascending brute force on the merged byte.
    pub g_merged: f64,
}

/// Ranks one pair of consecutive shots both ways. Returns
/// `(g_ind_rank, g_merged_rank)`.
pub fn attack_merged(
    first: &crate::ConditionalPrediction,
    second: &crate::ConditionalPrediction,
    actual: (usize, usize),
    merged: u8,
) -> Result<(u64, u32)> {
    Ok((pair_rank(&first.pmf, &second.pmf, actual.0, actual.1)?, merged as u32 + 1))
}

/// Output of hashing a run's biased samples and attacking the merged bytes.
#[derive(Debug, Clone)]
pub struct ExtractionRun {
    pub merged: Vec<u8>,
    pub summary: MergedGuessSummary,
}

/// Hashes Alice's bins from `run` with `matrix`, merges nibbles into bytes
/// and attacks pair `k = (shot 2k, shot 2k + 1)` both with Eve's predictions
/// and by ascending brute force on merged byte `k`.
pub fn extract_and_attack(
    scenario: &crate::SplitScenario,
    run: &crate::eavesdropper::AttackRun,
    matrix: &HashMatrix,
) -> Result<ExtractionRun> {
    use rayon::prelude::*;

    if scenario.binning.bin_count != 256 {
        return Err(Error::DimensionMismatch { expected: 256, actual: scenario.binning.bin_count });
    }
    let samples: Vec<u8> = run.shots.iter().map(|s| s.alice_bin as u8).collect();
    let merged = extract(&samples, matrix)?;
    let cond = crate::Conditioner::new(scenario)?;

    let pairs = (run.shots.len() / 2).min(merged.len());
    let g_ind_ranks: Vec<u64> = (0..pairs)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(p, q), k| {
                let (a, b) = (&run.shots[2 * k], &run.shots[2 * k + 1]);
                cond.pmf_into(cond.projected_mean(a.eve_x, a.eve_p), p);
                cond.pmf_into(cond.projected_mean(b.eve_x, b.eve_p), q);
                pair_rank(p, q, a.alice_bin, b.alice_bin)
            },
        )
        .collect::<Result<_>>()?;

    let n = pairs.max(1) as f64;
    let g_ind = g_ind_ranks.iter().sum::<u64>() as f64 / n;
    let g_merged = merged[..pairs].iter().map(|&v| v as u64 + 1).sum::<u64>() as f64 / n;
    Ok(ExtractionRun { merged, summary: MergedGuessSummary { pairs: pairs as u64, g_ind, g_merged } })
}
