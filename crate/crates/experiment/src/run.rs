//! Running one scenario end to end: shots, attack, optional extraction.

use cvqrng_core::eavesdropper::{attack_theory, run_attack, AttackRun, AttackTheory};
use cvqrng_core::entropy::{binned_gaussian, empirical_min_entropy, iid_guesswork, EmpiricalMinEntropy};
use cvqrng_core::extraction::{extract_and_attack, HashMatrix};
use cvqrng_core::rng::{sub_seed, Domain};
use cvqrng_core::{AttackSummary, MergedGuessSummary, SplitScenario};
use serde::{Deserialize, Serialize};

use crate::{Result, RunConfig};

/// One line of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub n_eve: f64,
    pub n_alice: f64,
    pub ratio: f64,
    pub h_min_unconditional: f64,
    pub h_min_conditional: f64,
    pub h_min_theory_unconditional: f64,
    pub h_min_theory_conditional: f64,
    pub guesswork_unconditional: f64,
    pub guesswork_conditional: f64,
    pub iid_worstcase_unconditional: f64,
    pub iid_worstcase_conditional: f64,
    pub g_ind: Option<f64>,
    pub g_merged: Option<f64>,
}

/// Hash matrix chosen for a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashRecord {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub candidate: u64,
    pub row_masks: Vec<u64>,
    /// L2 norm of the Walsh biases of the output under the scenario's
    /// unconditional sample distribution.
    pub output_bias: f64,
}

impl HashRecord {
    fn new(m: &HashMatrix, output_bias: f64) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            seed: m.seed,
            candidate: m.candidate,
            row_masks: m.row_masks.clone(),
            output_bias,
        }
    }
}

/// Everything reported about one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub index: usize,
    pub scenario: SplitScenario,
    pub metrics: MetricsRow,
    pub theory: AttackTheory,
    pub summary: AttackSummary,
    /// Min-entropy from the rate at which the first guess hits, without
    /// and with side information, with 95% intervals. These give the
    /// metrics columns.
    pub hit_rate_unconditional: EmpiricalMinEntropy,
    pub hit_rate_conditional: EmpiricalMinEntropy,
    /// `-log2` of the peak of Alice's measured histogram.
    pub h_min_histogram_peak: f64,
    /// `-log2` of the mean peak probability of Eve's per-shot predictions.
    pub h_min_mean_predicted_peak: f64,
    pub hash: Option<HashRecord>,
    pub extraction: Option<MergedGuessSummary>,
}

/// A scenario's result together with its bulky per-shot data.
#[derive(Debug)]
pub struct ScenarioOutcome {
    pub result: ScenarioResult,
    pub attack: AttackRun,
    pub merged: Option<Vec<u8>>,
}

/// Seed of scenario `index` of a sweep under the run's master seed.
pub fn scenario_seed(master: u64, index: usize) -> u64 {
    sub_seed(master, Domain::Scenario, index as u64)
}

/// The scenario for `(n_eve, n_alice)` under the run's settings.
pub fn build_scenario(config: &RunConfig, index: usize, n_eve: f64, n_alice: f64) -> Result<SplitScenario> {
    let n_eve = if config.force_no_tap { 0.0 } else { n_eve };
    let mut s = SplitScenario::from_photon_numbers(n_eve, n_alice, config.shots, scenario_seed(config.seed, index));
    s.alice_phase = config.alice_phase;
    s.electronic_noise_factor = config.electronic_noise_factor;
    s.coherence_ratio = config.coherence_ratio;
    s.binning = config.binning;
    s.validate()?;
    Ok(s)
}

pub fn run_scenario(config: &RunConfig, index: usize, n_eve: f64, n_alice: f64) -> Result<ScenarioOutcome> {
    let scenario = build_scenario(config, index, n_eve, n_alice)?;
    let attack = run_attack(&scenario)?;
    let theory = attack_theory(&scenario)?;
    let summary = attack.tally.summary()?;
    let shots = attack.shots.len() as u64;

    let hit_rate_unconditional = empirical_min_entropy(summary.unconditional_first_guess_hits, shots);
    let hit_rate_conditional = empirical_min_entropy(summary.first_guess_hits, shots);
    let h_min_unconditional = hit_rate_unconditional.bits;
    let h_min_conditional = hit_rate_conditional.bits;

    let mut counts = vec![0u64; scenario.binning.bin_count];
    for s in &attack.shots {
        counts[s.alice_bin] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(0);
    let mean_peak = attack.max_probs.iter().sum::<f64>() / shots as f64;

    let (hash, extraction, merged) = if config.extraction {
        let matrix = hash_matrix(config, &scenario)?;
        let run = extract_and_attack(&scenario, &attack, &matrix.0)?;
        (Some(HashRecord::new(&matrix.0, matrix.1)), Some(run.summary), Some(run.merged))
    } else {
        (None, None, None)
    };

    let n_eve = scenario.n_eve();
    let n_alice = scenario.n_alice();
    let metrics = MetricsRow {
        n_eve,
        n_alice,
        ratio: n_eve / n_alice,
        h_min_unconditional,
        h_min_conditional,
        h_min_theory_unconditional: theory.h_min_unconditional,
        h_min_theory_conditional: theory.h_min_conditional,
        guesswork_unconditional: summary.guesswork_unconditional,
        guesswork_conditional: summary.guesswork_conditional,
        iid_worstcase_unconditional: iid_guesswork(h_min_unconditional),
        iid_worstcase_conditional: iid_guesswork(h_min_conditional),
        g_ind: extraction.as_ref().map(|e| e.g_ind),
        g_merged: extraction.as_ref().map(|e| e.g_merged),
    };
    let result = ScenarioResult {
        index,
        hit_rate_unconditional,
        hit_rate_conditional,
        h_min_histogram_peak: -(peak as f64 / shots as f64).log2(),
        h_min_mean_predicted_peak: -mean_peak.log2(),
        scenario,
        metrics,
        theory,
        summary,
        hash,
        extraction,
    };
    Ok(ScenarioOutcome { result, attack, merged })
}

/// The run's hash matrix, screened against the scenario's unconditional
/// sample distribution when screening is on.
pub fn hash_matrix(config: &RunConfig, scenario: &SplitScenario) -> Result<(HashMatrix, f64)> {
    let h = &config.hash;
    let seed = h.seed.unwrap_or(config.seed);
    let marginal = binned_gaussian(0.0, scenario.alice_variance(), &scenario.binning)?;
    if h.screening {
        Ok(HashMatrix::screened(h.rows, h.cols, seed, marginal.probs(), h.tolerance, h.max_candidates)?)
    } else {
        let m = HashMatrix::random(h.rows, h.cols, seed)?;
        let bias = if h.cols == 8 {
            m.output_bias(&cvqrng_core::extraction::SampleSpectrum::new(marginal.probs())?)?
        } else {
            f64::NAN
        };
        Ok((m, bias))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(shots: u64) -> RunConfig {
        RunConfig { shots, ..Default::default() }
    }

    #[test]
    fn ratio_and_theory_columns() {
        let out = run_scenario(&small(4000), 0, 5.58, 5.12).unwrap();
        let m = &out.result.metrics;
        assert!((m.ratio - m.n_eve / m.n_alice).abs() < 1e-15);
        assert_eq!(m.h_min_theory_conditional, out.result.theory.h_min_conditional);
        assert!(m.g_ind.is_some() && m.g_merged.is_some());
        assert_eq!(out.merged.unwrap().len(), 2000);
    }

    #[test]
    fn forced_no_tap_keeps_alice() {
        let c = RunConfig { force_no_tap: true, extraction: false, ..small(1000) };
        let s = build_scenario(&c, 3, 5.58, 5.12).unwrap();
        assert_eq!(s.t_sq, 0.0);
        assert!((s.n_alice() - 5.12).abs() < 1e-12);
    }

    #[test]
    fn scenario_seeds_differ_by_index() {
        assert_ne!(scenario_seed(1, 0), scenario_seed(1, 1));
        assert_ne!(scenario_seed(1, 0), scenario_seed(2, 0));
    }
}
