//! Single-mode Gaussian states in the vacuum-variance-one-half convention.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Wigner variance of the vacuum per quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// A single-mode Gaussian field: mean quadrature displacement plus the Wigner
/// variance of each quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModeState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl GaussianModeState {
    pub fn new(mean_x: f64, mean_p: f64, var_x: f64, var_p: f64) -> Result<Self> {
        for (name, v) in [("var_x", var_x), ("var_p", var_p)] {
            if !(v.is_finite() && v >= VACUUM_VARIANCE) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be at least the vacuum variance 0.5, got {v}"
                )));
            }
        }
        if !(mean_x.is_finite() && mean_p.is_finite()) {
            return Err(Error::InvalidArgument("state means must be finite".into()));
        }
        Ok(Self { mean_x, mean_p, var_x, var_p })
    }

    pub fn vacuum() -> Self {
        Self { mean_x: 0.0, mean_p: 0.0, var_x: VACUUM_VARIANCE, var_p: VACUUM_VARIANCE }
    }

    /// Thermal state with mean photon number `n`.
    pub fn thermal(n: f64) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::InvalidArgument(format!("photon number must be >= 0, got {n}")));
        }
        let v = n + VACUUM_VARIANCE;
        Ok(Self { mean_x: 0.0, mean_p: 0.0, var_x: v, var_p: v })
    }

    /// Coherent state displaced to `(x, p)`.
    pub fn coherent(x: f64, p: f64) -> Self {
        Self { mean_x: x, mean_p: p, ..Self::vacuum() }
    }

    /// Mean photon number `<a†a>`.
    pub fn photon_number(&self) -> f64 {
        0.5 * (self.var_x + self.var_p) - VACUUM_VARIANCE
            + 0.5 * (self.mean_x * self.mean_x + self.mean_p * self.mean_p)
    }

    /// Mean of the quadrature measured at LO angle `phi`.
    pub fn projected_mean(&self, phi: f64) -> f64 {
        self.mean_x * phi.cos() + self.mean_p * phi.sin()
    }

    /// Variance of the quadrature at LO angle `phi` (no x-p correlation).
    pub fn projected_variance(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        self.var_x * c * c + self.var_p * s * s
    }

    /// Husimi-Q function: the Wigner function convolved with the vacuum.
    pub fn husimi(&self) -> Self {
        Self { var_x: self.var_x + VACUUM_VARIANCE, var_p: self.var_p + VACUUM_VARIANCE, ..*self }
    }

    /// Outputs of a lossless beam splitter with power transmission `t_sq`
    /// towards the second port, vacuum entering the other input. Returns
    /// `(reflected, transmitted)`; the transmitted mean carries the minus sign.
    pub fn split(&self, t_sq: f64) -> (Self, Self) {
        let r_sq = 1.0 - t_sq;
        let (r, t) = (r_sq.sqrt(), t_sq.sqrt());
        let mix = |v: f64, w: f64| w * (v - VACUUM_VARIANCE) + VACUUM_VARIANCE;
        let reflected = Self {
            mean_x: r * self.mean_x,
            mean_p: r * self.mean_p,
            var_x: mix(self.var_x, r_sq),
            var_p: mix(self.var_p, r_sq),
        };
        let transmitted = Self {
            mean_x: -t * self.mean_x,
            mean_p: -t * self.mean_p,
            var_x: mix(self.var_x, t_sq),
            var_p: mix(self.var_p, t_sq),
        };
        (reflected, transmitted)
    }
}
