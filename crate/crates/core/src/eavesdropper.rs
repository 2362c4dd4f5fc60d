//! Eve's side-information pipeline.
//!
//! Eve's heterodyne pair conditions the joint Husimi function of both
//! splitter outputs. Because every state involved is Gaussian the
//! conditioning is done in closed form: the conditional Husimi function of
//! Alice's mode has mean `g * (eve_x, eve_p)` with
//! `g = -r t n / (n_eve + f)` and variance
//! `n_alice + f - n_alice n_eve / (n_eve + f)`, where `f` is the detection
//! noise factor (1 for ideal detectors). Deconvolving the vacuum removes
//! `0.5 f` of variance, leaving the conditional Wigner function, whose
//! projection on Alice's LO axis is binned into Eve's prediction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{binned_gaussian, expected_guesswork, rank_table, AttackTally};
use crate::gaussian::{bin_probability, fill_bin_probabilities};
use crate::phase_space::generate_shots;
use crate::{BinningScheme, Error, Result, ShotRecord, SplitScenario};

/// Eve's prediction of Alice's next outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPrediction {
    pub mean_x: f64,
    pub mean_p: f64,
    /// Conditional Wigner variance per quadrature.
    pub var_c: f64,
    /// Conditional mean along Alice's LO axis.
    pub projected_mean: f64,
    pub pmf: Vec<f64>,
}

/// Outcome of ranking Alice's actual bin against a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessRecord {
    pub shot_index: u64,
    pub actual_bin: usize,
    pub rank: u32,
    pub first_guess_correct: bool,
}

/// Conditional Wigner variance of Alice's quadrature given Eve's heterodyne
/// record, for detection noise factor `noise_factor`.
pub fn conditional_variance(n_alice: f64, n_eve: f64, noise_factor: f64) -> f64 {
    n_alice + 0.5 * noise_factor - n_alice * n_eve / (n_eve + noise_factor)
}

/// Scenario constants for conditioning many shots.
#[derive(Debug, Clone)]
pub struct Conditioner {
    gain: f64,
    var_c: f64,
    sigma: f64,
    sin_phi: f64,
    cos_phi: f64,
    scheme: BinningScheme,
}

impl Conditioner {
    pub fn new(scenario: &SplitScenario) -> Result<Self> {
        scenario.validate()?;
        let f = scenario.electronic_noise_factor;
        let denom = scenario.n_eve() + scenario.heterodyne_noise_variance();
        if denom <= 0.0 {
            return Err(Error::InvalidScenario {
                field: "n_total",
                reason: "Eve's heterodyne variance vanishes".into(),
            });
        }
        let gain = -scenario.r() * scenario.t() * scenario.n_total / denom;
        let var_c = conditional_variance(scenario.n_alice(), scenario.n_eve(), f);
        let (sin_phi, cos_phi) = scenario.alice_phase.sin_cos();
        Ok(Self { gain, var_c, sigma: var_c.sqrt(), sin_phi, cos_phi, scheme: scenario.binning })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn variance(&self) -> f64 {
        self.var_c
    }

    pub fn scheme(&self) -> &BinningScheme {
        &self.scheme
    }

    /// Conditional mean along Alice's axis for one heterodyne pair.
    #[inline]
    pub fn projected_mean(&self, eve_x: f64, eve_p: f64) -> f64 {
        self.gain * (eve_x * self.cos_phi + eve_p * self.sin_phi)
    }

    pub fn predict(&self, eve_x: f64, eve_p: f64) -> ConditionalPrediction {
        let projected_mean = self.projected_mean(eve_x, eve_p);
        let mut pmf = Vec::with_capacity(self.scheme.bin_count);
        fill_bin_probabilities(projected_mean, self.sigma, &self.scheme, &mut pmf);
        ConditionalPrediction {
            mean_x: self.gain * eve_x,
            mean_p: self.gain * eve_p,
            var_c: self.var_c,
            projected_mean,
            pmf,
        }
    }

    /// Fills `out` with the prediction pmf for a projected mean.
    pub fn pmf_into(&self, projected_mean: f64, out: &mut Vec<f64>) {
        fill_bin_probabilities(projected_mean, self.sigma, &self.scheme, out);
    }

    /// Largest bin probability of the prediction centred at `projected_mean`.
    pub fn max_prob(&self, projected_mean: f64) -> f64 {
        let n = self.scheme.bin_count;
        let q = self.scheme.quantize(projected_mean);
        [q.saturating_sub(1), q, (q + 1).min(n - 1), 0, n - 1]
            .into_iter()
            .map(|k| bin_probability(k, projected_mean, self.sigma, &self.scheme))
            .fold(0.0, f64::max)
    }

    /// Rank of `actual_bin` in Eve's guessing order, equal to
    /// [`guess_rank`] on the full pmf.
    ///
    /// Interior bin probabilities fall strictly with the distance of the bin
    /// centre from the mean, so only bins no further out than the actual one
    /// (plus a one-bin margin) and the two saturating bins can outrank it.
    pub fn rank(&self, projected_mean: f64, actual_bin: usize) -> u32 {
        let n = self.scheme.bin_count;
        let s = &self.scheme;
        let p = |k| bin_probability(k, projected_mean, self.sigma, s);
        let target = p(actual_bin);
        let outranks = |k: usize, pk: f64| pk > target || (pk == target && k < actual_bin);

        if actual_bin == 0 || actual_bin == n - 1 || target < 1e-280 {
            let mut pmf = Vec::with_capacity(n);
            self.pmf_into(projected_mean, &mut pmf);
            return rank_in_pmf(&pmf, actual_bin);
        }

        let reach = (s.bin_center(actual_bin) - projected_mean).abs() + 2.0 * s.bin_width;
        let lo = s.quantize(projected_mean - reach).max(1);
        let hi = s.quantize(projected_mean + reach).min(n - 2);
        let mut rank = 1u32;
        for k in lo..=hi {
            if k != actual_bin && outranks(k, p(k)) {
                rank += 1;
            }
        }
        for k in [0, n - 1] {
            if outranks(k, p(k)) {
                rank += 1;
            }
        }
        rank
    }
}

/// Closed-form conditioning of Alice's mode on Eve's heterodyne pair.
pub fn condition(scenario: &SplitScenario, eve_x: f64, eve_p: f64) -> Result<ConditionalPrediction> {
    Ok(Conditioner::new(scenario)?.predict(eve_x, eve_p))
}

fn rank_in_pmf(pmf: &[f64], actual_bin: usize) -> u32 {
    let target = pmf[actual_bin];
    let better = pmf.iter().enumerate().filter(|&(k, &p)| p > target || (p == target && k < actual_bin)).count();
    better as u32 + 1
}

/// Position of `actual_bin` in descending-probability order with lower index
/// first on ties. Returns `(rank, first_guess_correct)`.
pub fn guess_rank(prediction: &ConditionalPrediction, actual_bin: usize) -> Result<(u32, bool)> {
    if actual_bin >= prediction.pmf.len() {
        return Err(Error::BinOutOfRange { index: actual_bin, bin_count: prediction.pmf.len() });
    }
    let rank = rank_in_pmf(&prediction.pmf, actual_bin);
    Ok((rank, rank == 1))
}

/// Shots of one attack together with Eve's guesses.
#[derive(Debug, Clone)]
pub struct AttackRun {
    pub shots: Vec<ShotRecord>,
    pub guesses: Vec<GuessRecord>,
    /// Rank of each actual bin under the optimal order for the unconditional
    /// thermal marginal, i.e. without side information.
    pub unconditional_ranks: Vec<u32>,
    /// Largest bin probability of each shot's prediction.
    pub max_probs: Vec<f64>,
    pub tally: AttackTally,
}

/// Generates the scenario's shots and ranks Alice's bins with and without
/// Eve's side information.
pub fn run_attack(scenario: &SplitScenario) -> Result<AttackRun> {
    let shots = generate_shots(scenario)?;
    let cond = Conditioner::new(scenario)?;
    let marginal = binned_gaussian(0.0, scenario.alice_variance(), &scenario.binning)?;
    let uncond_rank = rank_table(marginal.probs());

    let per_shot: Vec<(GuessRecord, u32, f64)> = shots
        .par_iter()
        .map(|s| {
            let m = cond.projected_mean(s.eve_x, s.eve_p);
            let rank = cond.rank(m, s.alice_bin);
            let g = GuessRecord { shot_index: s.index, actual_bin: s.alice_bin, rank, first_guess_correct: rank == 1 };
            (g, uncond_rank[s.alice_bin], cond.max_prob(m))
        })
        .collect();

    let mut tally = AttackTally::new(scenario.binning.bin_count);
    let mut guesses = Vec::with_capacity(per_shot.len());
    let mut unconditional_ranks = Vec::with_capacity(per_shot.len());
    let mut max_probs = Vec::with_capacity(per_shot.len());
    for (g, u, m) in per_shot {
        tally.record(g.rank, u);
        guesses.push(g);
        unconditional_ranks.push(u);
        max_probs.push(m);
    }
    Ok(AttackRun { shots, guesses, unconditional_ranks, max_probs, tally })
}

/// Eve's guess records for every shot of the scenario.
pub fn attack_stream(scenario: &SplitScenario) -> Result<Vec<GuessRecord>> {
    Ok(run_attack(scenario)?.guesses)
}

/// Analytic expectations of the attack, averaging the prediction over the
/// distribution of Eve's conditional mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackTheory {
    pub h_min_unconditional: f64,
    pub h_min_conditional: f64,
    pub guesswork_unconditional: f64,
    pub guesswork_conditional: f64,
    pub conditional_variance: f64,
}

pub fn attack_theory(scenario: &SplitScenario) -> Result<AttackTheory> {
    let cond = Conditioner::new(scenario)?;
    let scheme = scenario.binning;
    let marginal = binned_gaussian(0.0, scenario.alice_variance(), &scheme)?;
    let f = scenario.electronic_noise_factor;
    // variance of the projected conditional mean across shots
    let spread = scenario.n_alice() * scenario.n_eve() / (scenario.n_eve() + f);

    let mut buf = Vec::new();
    let mut guesswork_at = |m: f64| {
        cond.pmf_into(m, &mut buf);
        let d = crate::DiscreteDistribution::new(std::mem::take(&mut buf)).expect("normalised pmf");
        let g = expected_guesswork(&d);
        buf = d.probs().to_vec();
        g
    };

    let (mean_max, mean_gw) = if spread <= 0.0 {
        (cond.max_prob(0.0), guesswork_at(0.0))
    } else {
        let sd = spread.sqrt();
        let max = gauss_average(sd, scheme.bin_width / 32.0, |m| cond.max_prob(m));
        let gw = gauss_average(sd, scheme.bin_width / 8.0, &mut guesswork_at);
        (max, gw)
    };
    Ok(AttackTheory {
        h_min_unconditional: crate::entropy::min_entropy(&marginal),
        h_min_conditional: -mean_max.log2(),
        guesswork_unconditional: expected_guesswork(&marginal),
        guesswork_conditional: mean_gw,
        conditional_variance: cond.variance(),
    })
}

/// `E[f(X)]` for `X ~ N(0, sd²)` by composite Simpson over +-9 sd with step
/// at most `max_step`.
fn gauss_average(sd: f64, max_step: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 9.0 * sd;
    let mut intervals = ((2.0 * half / max_step).ceil() as usize).max(64);
    intervals += intervals % 2;
    let h = 2.0 * half / intervals as f64;
    let norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let mut acc = 0.0;
    let mut weight = 0.0;
    for i in 0..=intervals {
        let x = -half + h * i as f64;
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let density = norm * (-0.5 * (x / sd).powi(2)).exp();
        acc += w * density * f(x);
        weight += w * density;
    }
    acc / weight
}
