//! Thermal-field sampling, beam-splitter mixing and detection.
//!
//! The thermal field is sampled in the P representation: each shot carries a
//! classical Gaussian displacement of variance `n` per quadrature, and the
//! detectors add vacuum noise on top. This is exact for thermal, coherent and
//! vacuum inputs.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::shot_rng;
use crate::{Result, SplitScenario};

/// One experimental run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub index: u64,
    /// Hidden coherent displacement of the thermal field before the splitter.
    pub signal_x: f64,
    pub signal_p: f64,
    pub alice_raw: f64,
    pub alice_bin: usize,
    pub eve_x: f64,
    pub eve_p: f64,
}

fn standard_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (a, b)
}

/// Draws the displacement of a thermal field with mean photon number `n`.
pub fn sample_thermal_displacement<R: Rng + ?Sized>(n: f64, rng: &mut R) -> (f64, f64) {
    let (a, b) = standard_pair(rng);
    let s = n.sqrt();
    (s * a, s * b)
}

/// Ornstein-Uhlenbeck step from `prev` with correlation `exp(-coherence_ratio)`.
/// An infinite ratio reduces exactly to [`sample_thermal_displacement`]; a
/// zero ratio freezes the field.
pub fn sample_thermal_displacement_correlated<R: Rng + ?Sized>(
    n: f64,
    coherence_ratio: f64,
    prev: (f64, f64),
    rng: &mut R,
) -> (f64, f64) {
    let (a, b) = standard_pair(rng);
    ou_step(n, (-coherence_ratio).exp(), prev, (a, b))
}

fn ou_step(n: f64, rho: f64, prev: (f64, f64), xi: (f64, f64)) -> (f64, f64) {
    let s = (n * (1.0 - rho * rho)).sqrt();
    (rho * prev.0 + s * xi.0, rho * prev.1 + s * xi.1)
}

/// Mixes `displacement` on the splitter and samples both detectors.
pub fn run_shot<R: Rng + ?Sized>(
    scenario: &SplitScenario,
    index: u64,
    displacement: (f64, f64),
    rng: &mut R,
) -> ShotRecord {
    let (x, p) = displacement;
    let (r, t) = (scenario.r(), scenario.t());
    let (sin_phi, cos_phi) = scenario.alice_phase.sin_cos();

    let hom_sd = scenario.homodyne_noise_variance().sqrt();
    let het_sd = scenario.heterodyne_noise_variance().sqrt();
    let n_a: f64 = rng.sample(StandardNormal);
    let n_ex: f64 = rng.sample(StandardNormal);
    let n_ep: f64 = rng.sample(StandardNormal);

    let alice_raw = r * (x * cos_phi + p * sin_phi) + hom_sd * n_a;
    ShotRecord {
        index,
        signal_x: x,
        signal_p: p,
        alice_raw,
        alice_bin: scenario.binning.quantize(alice_raw),
        eve_x: -t * x + het_sd * n_ex,
        eve_p: -t * p + het_sd * n_ep,
    }
}

/// Generates shot `index` of an independent-shot scenario.
pub fn independent_shot(scenario: &SplitScenario, index: u64) -> ShotRecord {
    let mut rng = shot_rng(scenario.seed, index);
    let d = sample_thermal_displacement(scenario.n_total, &mut rng);
    run_shot(scenario, index, d, &mut rng)
}

/// Generates all shots of `scenario` on the current rayon pool.
///
/// Each shot owns the stream `(seed, index)`; the first two normals of that
/// stream drive the displacement innovation and the rest drive detection
/// noise. Correlated fields are resolved in a sequential pass over the
/// innovations first, so the output never depends on the worker count.
pub fn generate_shots(scenario: &SplitScenario) -> Result<Vec<ShotRecord>> {
    scenario.validate()?;
    let rho = scenario.shot_correlation();
    if rho == 0.0 {
        return Ok((0..scenario.shots).into_par_iter().map(|i| independent_shot(scenario, i)).collect());
    }

    let n = scenario.n_total;
    let innovations: Vec<(f64, f64)> =
        (0..scenario.shots).into_par_iter().map(|i| standard_pair(&mut shot_rng(scenario.seed, i))).collect();
    let mut displacements = Vec::with_capacity(innovations.len());
    let mut prev = None;
    for xi in innovations {
        let d = match prev {
            None => (n.sqrt() * xi.0, n.sqrt() * xi.1),
            Some(prev) => ou_step(n, rho, prev, xi),
        };
        displacements.push(d);
        prev = Some(d);
    }
    Ok(displacements
        .into_par_iter()
        .enumerate()
        .map(|(i, d)| {
            let mut rng = shot_rng(scenario.seed, i as u64);
            let _ = standard_pair(&mut rng);
            run_shot(scenario, i as u64, d, &mut rng)
        })
        .collect())
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
