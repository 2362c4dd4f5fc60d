use serde::{Deserialize, Serialize};

use crate::{BinningScheme, Error, GaussianModeState, Result};

/// One beam-splitter attack configuration.
///
/// A thermal field of `n_total` photons is split; Eve keeps the fraction
/// `t_sq` for heterodyne detection and Alice homodynes the remainder at LO
/// angle `alice_phase`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitScenario {
    pub n_total: f64,
    pub t_sq: f64,
    #[serde(default)]
    pub alice_phase: f64,
    /// Multiplies the detection vacuum-noise variance of both parties.
    #[serde(default = "one")]
    pub electronic_noise_factor: f64,
    /// Pulse spacing over coherence time. `None` means independent shots.
    #[serde(default)]
    pub coherence_ratio: Option<f64>,
    pub shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub binning: BinningScheme,
}

fn one() -> f64 {
    1.0
}

impl SplitScenario {
    /// Scenario with default phase, noise, binning and independent shots.
    pub fn new(n_total: f64, t_sq: f64, shots: u64, seed: u64) -> Self {
        Self {
            n_total,
            t_sq,
            alice_phase: 0.0,
            electronic_noise_factor: 1.0,
            coherence_ratio: None,
            shots,
            seed,
            binning: BinningScheme::default(),
        }
    }

    /// Scenario from the photon numbers each party receives.
    pub fn from_photon_numbers(n_eve: f64, n_alice: f64, shots: u64, seed: u64) -> Self {
        let n_total = n_eve + n_alice;
        let t_sq = if n_total > 0.0 { n_eve / n_total } else { 0.0 };
        Self::new(n_total, t_sq, shots, seed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidScenario { field, reason });
        if !(self.n_total.is_finite() && self.n_total >= 0.0) {
            return bad("n_total", format!("must be finite and >= 0, got {}", self.n_total));
        }
        if !(0.0..=1.0).contains(&self.t_sq) {
            return bad("t_sq", format!("must lie in [0, 1], got {}", self.t_sq));
        }
        if !self.alice_phase.is_finite() {
            return bad("alice_phase", "must be finite".into());
        }
        if !(self.electronic_noise_factor.is_finite() && self.electronic_noise_factor >= 1.0) {
            return bad("electronic_noise_factor", format!("must be >= 1, got {}", self.electronic_noise_factor));
        }
        if let Some(c) = self.coherence_ratio {
            if c.is_nan() || c < 0.0 {
                return bad("coherence_ratio", format!("must be >= 0, got {c}"));
            }
        }
        if self.shots == 0 {
            return bad("shots", "must be positive".into());
        }
        self.binning.validate().map_err(|e| Error::InvalidScenario { field: "binning", reason: e.to_string() })
    }

    pub fn n_eve(&self) -> f64 {
        self.t_sq * self.n_total
    }

    /// `n_total - n_eve`, so the two shares always add back up exactly.
    pub fn n_alice(&self) -> f64 {
        self.n_total - self.n_eve()
    }

    /// Amplitude reflection coefficient (towards Alice).
    pub fn r(&self) -> f64 {
        (1.0 - self.t_sq).sqrt()
    }

    /// Amplitude transmission coefficient (towards Eve).
    pub fn t(&self) -> f64 {
        self.t_sq.sqrt()
    }

    /// Lag-one correlation of the thermal displacement between shots.
    pub fn shot_correlation(&self) -> f64 {
        match self.coherence_ratio {
            None => 0.0,
            Some(c) if c.is_infinite() => 0.0,
            Some(c) => (-c).exp(),
        }
    }

    /// Detection vacuum-noise variance at Alice's homodyne detector.
    pub fn homodyne_noise_variance(&self) -> f64 {
        0.5 * self.electronic_noise_factor
    }

    /// Per-quadrature noise variance of Eve's heterodyne outcomes.
    pub fn heterodyne_noise_variance(&self) -> f64 {
        self.electronic_noise_factor
    }

    /// Variance of Alice's raw outcome.
    pub fn alice_variance(&self) -> f64 {
        self.n_alice() + self.homodyne_noise_variance()
    }

    /// Wigner description of the field before the splitter.
    pub fn source_state(&self) -> GaussianModeState {
        GaussianModeState::thermal(self.n_total).unwrap_or_else(|_| GaussianModeState::vacuum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_bookkeeping_is_exact() {
        for &(n, t) in &[(10.0, 0.5), (15.64, 1.04 / 15.64), (0.0, 0.3), (7.3, 1.0)] {
            let s = SplitScenario::new(n, t, 1, 0);
            assert_eq!(s.n_alice() + s.n_eve(), n);
            assert!((s.r().powi(2) + s.t().powi(2) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn from_photon_numbers_round_trips() {
        let s = SplitScenario::from_photon_numbers(7.09, 2.28, 1, 0);
        assert!((s.n_eve() - 7.09).abs() < 1e-12);
        assert!((s.n_alice() - 2.28).abs() < 1e-12);
        let v = SplitScenario::from_photon_numbers(0.0, 0.0, 1, 0);
        assert_eq!(v.t_sq, 0.0);
        v.validate().unwrap();
    }

    #[test]
    fn validation_names_offending_field() {
        let mut s = SplitScenario::new(1.0, 1.5, 10, 0);
        match s.validate() {
            Err(Error::InvalidScenario { field, .. }) => assert_eq!(field, "t_sq"),
            other => panic!("{other:?}"),
        }
        s.t_sq = 0.5;
        s.electronic_noise_factor = 0.9;
        assert!(matches!(s.validate(), Err(Error::InvalidScenario { field: "electronic_noise_factor", .. })));
        s.electronic_noise_factor = 1.03;
        s.shots = 0;
        assert!(matches!(s.validate(), Err(Error::InvalidScenario { field: "shots", .. })));
    }

    #[test]
    fn correlation_limits() {
        let mut s = SplitScenario::new(1.0, 0.5, 10, 0);
        assert_eq!(s.shot_correlation(), 0.0);
        s.coherence_ratio = Some(f64::INFINITY);
        assert_eq!(s.shot_correlation(), 0.0);
        s.coherence_ratio = Some(0.0);
        assert_eq!(s.shot_correlation(), 1.0);
        s.coherence_ratio = Some(0.5);
        assert!((s.shot_correlation() - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn json_defaults() {
        let s: SplitScenario =
            serde_json::from_str(r#"{"n_total": 2.0, "t_sq": 0.25, "shots": 5, "seed": 9}"#).unwrap();
        assert_eq!(s, SplitScenario::new(2.0, 0.25, 5, 9));
    }
}
