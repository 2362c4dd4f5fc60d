//! Run configuration, read from a JSON document.

use std::path::Path;

use cvqrng_core::stat_tests::BatteryConfig;
use cvqrng_core::BinningScheme;
use serde::{Deserialize, Serialize};

use crate::{ExperimentError, Result};

/// Desk-scale default shot count per scenario.
pub const DESK_SHOTS: u64 = 200_000;
/// Shot count of a full-scale campaign.
pub const FULL_SCALE_SHOTS: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub shots: u64,
    /// Worker threads; 0 uses all available cores. Never affects outputs.
    #[serde(skip_serializing)]
    pub workers: usize,
    pub alice_phase: f64,
    pub electronic_noise_factor: f64,
    /// `None` means independent shots.
    pub coherence_ratio: Option<f64>,
    pub binning: BinningScheme,
    pub hash: HashConfig,
    pub battery: BatteryConfig,
    /// Run the extraction and merged-number attack for every scenario.
    pub extraction: bool,
    /// Write the raw shot records of every scenario.
    pub dump_shots: bool,
    /// Overrides the reference `(n_eve, n_alice)` rows of the sweep.
    pub rows: Option<Vec<(f64, f64)>>,
    /// Force Eve's tap closed in every scenario (control runs).
    pub force_no_tap: bool,
    pub fig3: Fig3Config,
    pub single: SingleConfig,
    /// Replace the extracted stream before testing (negative controls).
    pub inject: Option<Injection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HashConfig {
    pub rows: usize,
    pub cols: usize,
    /// Defaults to the run seed.
    pub seed: Option<u64>,
    /// Screen candidate matrices against the source's binned marginal.
    pub screening: bool,
    pub tolerance: f64,
    pub max_candidates: u64,
}

impl Default for HashConfig {
    fn default() -> Self {
        Self { rows: 4, cols: 8, seed: None, screening: true, tolerance: 2e-3, max_candidates: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Config {
    pub n_alice: f64,
    pub n_eve_min: f64,
    pub n_eve_max: f64,
    pub points: usize,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self { n_alice: 5.0, n_eve_min: 0.01, n_eve_max: 500.0, points: 10 }
    }
}

/// Scenario for `single` and `extract-test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingleConfig {
    pub n_eve: f64,
    pub n_alice: f64,
}

impl Default for SingleConfig {
    fn default() -> Self {
        let (n_eve, n_alice) = crate::reference_rows::REFERENCE_ROWS[crate::reference_rows::MID_RATIO_ROW];
        Self { n_eve, n_alice }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    Zeros,
    Alternating,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            shots: DESK_SHOTS,
            workers: 0,
            alice_phase: 0.0,
            electronic_noise_factor: 1.0,
            coherence_ratio: None,
            binning: BinningScheme::default(),
            hash: HashConfig::default(),
            battery: BatteryConfig::default(),
            extraction: true,
            dump_shots: false,
            rows: None,
            force_no_tap: false,
            fig3: Fig3Config::default(),
            single: SingleConfig::default(),
            inject: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(ExperimentError::ConfigParse)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(ExperimentError::config(key, reason));
        if self.shots < 2 {
            return bad("shots", format!("must be at least 2, got {}", self.shots));
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
        if let Err(e) = self.binning.validate() {
            return bad("binning", e.to_string());
        }
        if self.extraction && self.binning.bin_count != 256 {
            return bad("binning.bin_count", "extraction hashes 8-bit samples and needs 256 bins".into());
        }
        let h = &self.hash;
        if h.rows == 0 || !h.rows.is_multiple_of(4) || h.rows > 20 {
            return bad("hash.rows", format!("must be a positive multiple of 4 up to 20, got {}", h.rows));
        }
        if h.cols == 0 || !h.cols.is_multiple_of(8) || h.cols > 64 {
            return bad("hash.cols", format!("must be a positive multiple of 8 up to 64, got {}", h.cols));
        }
        if h.rows > h.cols {
            return bad("hash.rows", format!("cannot exceed hash.cols ({} > {})", h.rows, h.cols));
        }
        if h.tolerance.is_nan() || h.tolerance < 0.0 {
            return bad("hash.tolerance", format!("must be >= 0, got {}", h.tolerance));
        }
        if !(self.battery.significance > 0.0 && self.battery.significance < 1.0) {
            return bad("battery.significance", format!("must lie in (0, 1), got {}", self.battery.significance));
        }
        if let Some(rows) = &self.rows {
            if rows.is_empty() {
                return bad("rows", "must not be empty".into());
            }
            for (i, &(e, a)) in rows.iter().enumerate() {
                if !(e.is_finite() && a.is_finite() && e >= 0.0 && a >= 0.0) {
                    return bad("rows", format!("row {i} has invalid photon numbers ({e}, {a})"));
                }
            }
        }
        let f = &self.fig3;
        if !(f.n_alice >= 0.0 && f.n_eve_min > 0.0 && f.n_eve_max >= f.n_eve_min && f.points >= 2) {
            return bad("fig3", "needs n_alice >= 0, 0 < n_eve_min <= n_eve_max and points >= 2".into());
        }
        let s = &self.single;
        if !(s.n_eve >= 0.0 && s.n_alice >= 0.0 && s.n_eve.is_finite() && s.n_alice.is_finite()) {
            return bad("single", format!("invalid photon numbers ({}, {})", s.n_eve, s.n_alice));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_reported() {
        let err = RunConfig::from_json(r#"{"shotz": 5}"#).unwrap_err().to_string();
        assert!(err.contains("shotz"), "{err}");
    }

    #[test]
    fn invalid_value_names_key() {
        match RunConfig::from_json(r#"{"electronic_noise_factor": 0.5}"#) {
            Err(ExperimentError::Config { key, .. }) => assert_eq!(key, "electronic_noise_factor"),
            other => panic!("{other:?}"),
        }
        match RunConfig::from_json(r#"{"hash": {"rows": 3}}"#) {
            Err(ExperimentError::Config { key, .. }) => assert_eq!(key, "hash.rows"),
            other => panic!("{other:?}"),
        }
        match RunConfig::from_json(r#"{"binning": {"bin_count": 128}}"#) {
            Err(ExperimentError::Config { key, .. }) => assert_eq!(key, "binning.bin_count"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trips_through_json() {
        let mut c = RunConfig { coherence_ratio: Some(0.5), inject: Some(Injection::Zeros), ..Default::default() };
        c.hash.seed = Some(42);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }
}
