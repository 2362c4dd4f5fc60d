//! Mapping of real quadrature values onto discrete random numbers.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default bin width in quadrature units (8-bit digitisation of the
/// calibrated quadrature range).
pub const DEFAULT_BIN_WIDTH: f64 = 0.15625;
pub const DEFAULT_BIN_COUNT: usize = 256;

/// Uniform bins of width `bin_width`, `bin_count` of them, laid out
/// symmetrically about `center`.
///
/// Bins are half-open `[edge, edge + width)`, so a value that sits exactly on
/// an edge lands in the upper bin. Values beyond the covered range saturate
/// into the two extreme bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinningScheme {
    #[serde(default = "default_width")]
    pub bin_width: f64,
    #[serde(default = "default_count")]
    pub bin_count: usize,
    #[serde(default)]
    pub center: f64,
}

fn default_width() -> f64 {
    DEFAULT_BIN_WIDTH
}

fn default_count() -> usize {
    DEFAULT_BIN_COUNT
}

impl Default for BinningScheme {
    fn default() -> Self {
        Self { bin_width: DEFAULT_BIN_WIDTH, bin_count: DEFAULT_BIN_COUNT, center: 0.0 }
    }
}

impl BinningScheme {
    pub fn new(bin_width: f64, bin_count: usize, center: f64) -> Result<Self> {
        let scheme = Self { bin_width, bin_count, center };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(Error::InvalidBinning(format!("bin_width must be positive, got {}", self.bin_width)));
        }
        if self.bin_count < 2 || !self.bin_count.is_multiple_of(2) {
            return Err(Error::InvalidBinning(format!(
                "bin_count must be even and at least 2, got {}",
                self.bin_count
            )));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidBinning("center must be finite".into()));
        }
        Ok(())
    }

    /// Lower edge of bin 0.
    pub fn lower(&self) -> f64 {
        self.center - self.bin_width * (self.bin_count / 2) as f64
    }

    pub fn upper(&self) -> f64 {
        self.center + self.bin_width * (self.bin_count / 2) as f64
    }

    /// Position of edge `k` for `k` in `0..=bin_count`. Edge 0 and edge
    /// `bin_count` bound the covered range; the extreme bins extend past them.
    pub fn edge(&self, k: usize) -> f64 {
        self.lower() + self.bin_width * k as f64
    }

    /// Midpoint of bin `k`.
    pub fn bin_center(&self, k: usize) -> f64 {
        self.lower() + self.bin_width * (k as f64 + 0.5)
    }

    /// Bin index of `value`. Total: NaN maps to bin 0.
    pub fn quantize(&self, value: f64) -> usize {
        let pos = ((value - self.lower()) / self.bin_width).floor();
        if pos.is_nan() || pos < 0.0 {
            0
        } else if pos >= self.bin_count as f64 {
            self.bin_count - 1
        } else {
            pos as usize
        }
    }
}
