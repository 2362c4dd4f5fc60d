//! Min-entropy and guesswork measures over binned outcome distributions.

use serde::{Deserialize, Serialize};

use crate::gaussian::fill_bin_probabilities;
use crate::{BinningScheme, Error, Result};

/// Probability vector over bin indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(Self { probs: vec![1.0 / n as f64; n] })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::BinOutOfRange { index: at, bin_count: n });
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// Normalised histogram of observed bin indices.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyDistribution);
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }
}

/// Bins in guessing order: most probable first, lower index first on ties.
pub fn guess_order(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order
}

/// `ranks[k]` is the guess number at which bin `k` is tried.
pub fn rank_table(probs: &[f64]) -> Vec<u32> {
    let mut ranks = vec![0u32; probs.len()];
    for (i, k) in guess_order(probs).into_iter().enumerate() {
        ranks[k] = i as u32 + 1;
    }
    ranks
}

/// `N(mean, variance)` integrated over the bins of `scheme`; the extreme bins
/// absorb the tails.
pub fn binned_gaussian(mean: f64, variance: f64, scheme: &BinningScheme) -> Result<DiscreteDistribution> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::NonPositiveVariance(variance));
    }
    scheme.validate()?;
    let mut probs = Vec::new();
    fill_bin_probabilities(mean, variance.sqrt(), scheme, &mut probs);
    DiscreteDistribution::new(probs)
}

/// `-log2(max p)` in bits.
pub fn min_entropy(d: &DiscreteDistribution) -> f64 {
    -d.max_prob().log2()
}

/// Mean number of guesses for an attacker guessing in descending-probability
/// order.
pub fn expected_guesswork(d: &DiscreteDistribution) -> f64 {
    guess_order(d.probs()).into_iter().enumerate().map(|(i, k)| (i + 1) as f64 * d.probs()[k]).sum()
}

/// Asymptotic per-sample growth exponent of the `alpha`-th guesswork moment:
/// `(1 + alpha) * log2(sum p^(1 / (1 + alpha)))`.
pub fn renyi_guesswork_exponent(d: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let e = 1.0 / (1.0 + alpha);
    let s: f64 = d.probs().iter().filter(|&&p| p > 0.0).map(|p| p.powf(e)).sum();
    Ok((1.0 + alpha) * s.log2())
}

/// Expected guesses for `beta` uniformly random bits: `2^(beta - 1) + 0.5`.
pub fn iid_guesswork(beta: f64) -> f64 {
    (beta - 1.0).exp2() + 0.5
}

/// Mergeable counts from a guessing attack. All fields are integers, so
/// partial tallies combine associatively and exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackTally {
    pub shots: u64,
    pub conditional_hits: u64,
    pub unconditional_hits: u64,
    pub conditional_rank_sum: u64,
    pub unconditional_rank_sum: u64,
    pub conditional_rank_sq_sum: u128,
    pub unconditional_rank_sq_sum: u128,
    /// `rank_histogram[r - 1]` counts conditional guesses that took `r` tries.
    pub rank_histogram: Vec<u64>,
}

impl AttackTally {
    pub fn new(bin_count: usize) -> Self {
        Self { rank_histogram: vec![0; bin_count], ..Self::default() }
    }

    pub fn record(&mut self, conditional_rank: u32, unconditional_rank: u32) {
        let (c, u) = (conditional_rank as u64, unconditional_rank as u64);
        self.shots += 1;
        self.conditional_hits += (c == 1) as u64;
        self.unconditional_hits += (u == 1) as u64;
        self.conditional_rank_sum += c;
        self.unconditional_rank_sum += u;
        self.conditional_rank_sq_sum += (c * c) as u128;
        self.unconditional_rank_sq_sum += (u * u) as u128;
        let slot = c as usize - 1;
        if slot >= self.rank_histogram.len() {
            self.rank_histogram.resize(slot + 1, 0);
        }
        self.rank_histogram[slot] += 1;
    }

    pub fn merge(mut self, other: &Self) -> Self {
        self.shots += other.shots;
        self.conditional_hits += other.conditional_hits;
        self.unconditional_hits += other.unconditional_hits;
        self.conditional_rank_sum += other.conditional_rank_sum;
        self.unconditional_rank_sum += other.unconditional_rank_sum;
        self.conditional_rank_sq_sum += other.conditional_rank_sq_sum;
        self.unconditional_rank_sq_sum += other.unconditional_rank_sq_sum;
        if other.rank_histogram.len() > self.rank_histogram.len() {
            self.rank_histogram.resize(other.rank_histogram.len(), 0);
        }
        for (a, b) in self.rank_histogram.iter_mut().zip(&other.rank_histogram) {
            *a += b;
        }
        self
    }

    pub fn summary(&self) -> Result<AttackSummary> {
        if self.shots == 0 {
            return Err(Error::NoRecords);
        }
        let n = self.shots as f64;
        Ok(AttackSummary {
            shots: self.shots,
            first_guess_hits: self.conditional_hits,
            unconditional_first_guess_hits: self.unconditional_hits,
            mean_rank: self.conditional_rank_sum as f64 / n,
            rank_histogram: self.rank_histogram.clone(),
            h_min_unconditional: empirical_min_entropy(self.unconditional_hits, self.shots).bits,
            h_min_conditional: empirical_min_entropy(self.conditional_hits, self.shots).bits,
            guesswork_unconditional: self.unconditional_rank_sum as f64 / n,
            guesswork_conditional: self.conditional_rank_sum as f64 / n,
            guesswork_unconditional_stderr: stderr(
                self.unconditional_rank_sum,
                self.unconditional_rank_sq_sum,
                self.shots,
            ),
            guesswork_conditional_stderr: stderr(self.conditional_rank_sum, self.conditional_rank_sq_sum, self.shots),
        })
    }
}

fn stderr(sum: u64, sq_sum: u128, n: u64) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    let nf = n as f64;
    let mean = sum as f64 / nf;
    let var = (sq_sum as f64 - nf * mean * mean) / (nf - 1.0);
    (var.max(0.0) / nf).sqrt()
}

/// Aggregate outcome of a guessing attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub shots: u64,
    /// Conditional (side-information) first-guess successes.
    pub first_guess_hits: u64,
    pub unconditional_first_guess_hits: u64,
    /// Mean conditional rank.
    pub mean_rank: f64,
    pub rank_histogram: Vec<u64>,
    pub h_min_unconditional: f64,
    pub h_min_conditional: f64,
    pub guesswork_unconditional: f64,
    pub guesswork_conditional: f64,
    pub guesswork_unconditional_stderr: f64,
    pub guesswork_conditional_stderr: f64,
}

/// Min-entropy estimated from a first-guess hit rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMinEntropy {
    pub bits: f64,
    /// 95% Wilson-score interval, in bits (low bits = high hit rate).
    pub lower_bits: f64,
    pub upper_bits: f64,
    /// No hits were observed; `bits` is then `log2(shots)`, a lower bound.
    pub censored: bool,
}

const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson-score interval for `hits / trials` at 95%.
pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `-log2(hits / shots)` with its Wilson interval.
pub fn empirical_min_entropy(hits: u64, shots: u64) -> EmpiricalMinEntropy {
    if shots == 0 {
        return EmpiricalMinEntropy { bits: f64::NAN, lower_bits: f64::NAN, upper_bits: f64::NAN, censored: true };
    }
    let (lo, hi) = wilson_interval(hits, shots);
    let censored = hits == 0;
    let rate = if censored { 1.0 / shots as f64 } else { hits as f64 / shots as f64 };
    EmpiricalMinEntropy { bits: -rate.log2(), lower_bits: -hi.log2(), upper_bits: -lo.log2(), censored }
}

/// Conditional min-entropy from the attack's first-guess frequency.
pub fn conditional_min_entropy_empirical(summary: &AttackSummary) -> EmpiricalMinEntropy {
    empirical_min_entropy(summary.first_guess_hits, summary.shots)
}

/// Mean rank over guess records.
pub fn conditional_expected_guesswork<'a, I>(records: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a crate::GuessRecord>,
{
    let (n, sum) = records.into_iter().fold((0u64, 0u64), |(n, s), r| (n + 1, s + r.rank as u64));
    if n == 0 {
        return Err(Error::NoRecords);
    }
    Ok(sum as f64 / n as f64)
}
