//! Photon-number pairs `(n_eve, n_alice)` of the reference splitting-ratio
//! sweep.

pub const REFERENCE_ROWS: [(f64, f64); 15] = [
    (1.04, 14.60),
    (2.01, 12.78),
    (2.73, 11.98),
    (4.06, 9.64),
    (4.64, 8.40),
    (4.59, 7.49),
    (5.02, 6.24),
    (5.58, 5.12),
    (6.34, 3.87),
    (6.89, 2.97),
    (7.09, 2.28),
    (7.53, 1.54),
    (7.70, 0.82),
    (7.90, 0.57),
    (8.05, 0.22),
];

/// Row used for single-scenario extraction runs: the splitting ratio closest
/// to one.
pub const MID_RATIO_ROW: usize = 7;

/// `points` values of `n_eve`, log-spaced from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            (0..points)
                .map(|i| if i + 1 == points { max } else { (a + (b - a) * i as f64 / (points - 1) as f64).exp() })
                .collect()
        }
    }
}
