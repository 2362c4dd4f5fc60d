//! Binned normal probabilities.
//!
//! Each bin probability is computed from whichever tail keeps precision: bins
//! wholly below the mean use lower-tail differences, bins wholly above use
//! upper-tail differences. Probabilities far out in either tail therefore keep
//! full relative precision instead of cancelling against 1.

use libm::erfc;

use crate::BinningScheme;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Φ(z)`.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// Tail mass outside edge `x`: the lower tail when `x <= mean`, the upper tail
/// otherwise.
#[inline]
fn tail(x: f64, mean: f64, sigma: f64) -> f64 {
    if x <= mean {
        0.5 * erfc((mean - x) / sigma * FRAC_1_SQRT_2)
    } else {
        0.5 * erfc((x - mean) / sigma * FRAC_1_SQRT_2)
    }
}

#[inline]
fn combine(lo: f64, lo_tail: f64, hi: f64, hi_tail: f64, mean: f64) -> f64 {
    if hi <= mean {
        hi_tail - lo_tail
    } else if lo > mean {
        lo_tail - hi_tail
    } else {
        1.0 - lo_tail - hi_tail
    }
}

/// Probability of bin `k` under `N(mean, sigma²)`, with the extreme bins
/// absorbing the tails beyond the covered range.
pub fn bin_probability(k: usize, mean: f64, sigma: f64, scheme: &BinningScheme) -> f64 {
    let n = scheme.bin_count;
    let (lo, lo_tail) = if k == 0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        let e = scheme.edge(k);
        (e, tail(e, mean, sigma))
    };
    let (hi, hi_tail) = if k + 1 == n {
        (f64::INFINITY, 0.0)
    } else {
        let e = scheme.edge(k + 1);
        (e, tail(e, mean, sigma))
    };
    combine(lo, lo_tail, hi, hi_tail, mean).max(0.0)
}

/// Fills `out` with all bin probabilities. Produces bit-identical values to
/// [`bin_probability`] for every bin.
pub fn fill_bin_probabilities(mean: f64, sigma: f64, scheme: &BinningScheme, out: &mut Vec<f64>) {
    let n = scheme.bin_count;
    out.clear();
    out.reserve(n);
    let mut lo = f64::NEG_INFINITY;
    let mut lo_tail = 0.0;
    for k in 0..n {
        let (hi, hi_tail) = if k + 1 == n {
            (f64::INFINITY, 0.0)
        } else {
            let e = scheme.edge(k + 1);
            (e, tail(e, mean, sigma))
        };
        out.push(combine(lo, lo_tail, hi, hi_tail, mean).max(0.0));
        lo = hi;
        lo_tail = hi_tail;
    }
}
