//! Properties of the guesswork and min-entropy measures.

use cvqrng_core::eavesdropper::run_attack;
use cvqrng_core::entropy::{binned_gaussian, expected_guesswork, iid_guesswork, min_entropy, renyi_guesswork_exponent};
use cvqrng_core::{BinningScheme, DiscreteDistribution, SplitScenario};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

// Direct 500-digit evaluations over the default 256-bin scheme (tail bins
// need the extra digits).
const VACUUM_RENYI_ALPHA_1: f64 = 4.506_745_644_478_386;
const VACUUM_RENYI_ALPHA_3: f64 = 14.520_215_930_263_497;
const VACUUM_MIN_ENTROPY: f64 = 3.515_522_493_166_878;
const VACUUM_GUESSWORK: f64 = 7.751_035_540_943_258;
const THERMAL_5_5_MIN_ENTROPY: f64 = 5.234_602_798_112_139;

fn normalised(raw: Vec<f64>) -> DiscreteDistribution {
    let s: f64 = raw.iter().sum();
    DiscreteDistribution::new(raw.into_iter().map(|x| x / s).collect()).unwrap()
}

fn majorizes(a: &[f64], b: &[f64]) -> bool {
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let (mut sa, mut sb) = (0.0, 0.0);
    a.iter().zip(&b).all(|(x, y)| {
        sa += x;
        sb += y;
        sa >= sb - 1e-12
    })
}

proptest! {
    #[test]
    fn guesswork_is_bounded(raw in prop::collection::vec(0.0f64..1.0, 1..64)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let n = raw.len() as f64;
        let g = expected_guesswork(&normalised(raw));
        prop_assert!(g >= 1.0 - 1e-12);
        prop_assert!(g <= (n + 1.0) / 2.0 + 1e-9);
    }

    #[test]
    fn only_uniform_attains_upper_bound(raw in prop::collection::vec(0.01f64..1.0, 2..64)) {
        let n = raw.len();
        let d = normalised(raw);
        let uniform = d.probs().iter().all(|&p| (p - 1.0 / n as f64).abs() < 1e-12);
        let at_bound = (expected_guesswork(&d) - (n as f64 + 1.0) / 2.0).abs() < 1e-9;
        prop_assert_eq!(uniform, at_bound);
    }

    /// Moving mass from a less likely to a more likely outcome yields a
    /// distribution that majorizes the original.
    #[test]
    fn majorization_lowers_guesswork(
        raw in prop::collection::vec(0.01f64..1.0, 2..40),
        moves in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0.0f64..1.0), 1..6),
    ) {
        let d2 = normalised(raw);
        let mut p = d2.probs().to_vec();
        for (i, j, frac) in moves {
            let (i, j) = (i.index(p.len()), j.index(p.len()));
            let (hi, lo) = if p[i] >= p[j] { (i, j) } else { (j, i) };
            if hi == lo { continue; }
            let delta = frac * p[lo];
            p[hi] += delta;
            p[lo] -= delta;
        }
        let d1 = normalised(p);
        prop_assert!(majorizes(d1.probs(), d2.probs()));
        prop_assert!(expected_guesswork(&d1) <= expected_guesswork(&d2) + 1e-9);
    }

    #[test]
    fn worst_case_iid_never_exceeds_guesswork(var in 0.5f64..400.0, mean in -5.0f64..5.0) {
        let d = binned_gaussian(mean, var, &BinningScheme::default()).unwrap();
        prop_assert!(iid_guesswork(min_entropy(&d)) <= expected_guesswork(&d) + 1e-9);
    }

    #[test]
    fn worst_case_iid_bound_holds_for_any_distribution(raw in prop::collection::vec(0.0f64..1.0, 1..64)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let d = normalised(raw);
        prop_assert!(iid_guesswork(min_entropy(&d)) <= expected_guesswork(&d) + 1e-9);
    }
}

#[test]
fn vacuum_oracle_values() {
    let d = binned_gaussian(0.0, 0.5, &BinningScheme::default()).unwrap();
    assert!((min_entropy(&d) - VACUUM_MIN_ENTROPY).abs() < 1e-12);
    assert!((expected_guesswork(&d) - VACUUM_GUESSWORK).abs() < 1e-11);
    assert!((renyi_guesswork_exponent(&d, 1.0).unwrap() - VACUUM_RENYI_ALPHA_1).abs() < 1e-12);
    let r3 = renyi_guesswork_exponent(&d, 3.0).unwrap();
    assert!((r3 - VACUUM_RENYI_ALPHA_3).abs() < 1e-11, "{r3}");
}

#[test]
fn thermal_min_entropy_matches_oracle_and_monte_carlo() {
    let scheme = BinningScheme::default();
    let d = binned_gaussian(0.0, 5.5, &scheme).unwrap();
    let h = min_entropy(&d);
    assert!((h - 5.23).abs() < 0.02, "{h}");
    assert!((h - THERMAL_5_5_MIN_ENTROPY).abs() < 1e-12);

    const N: u64 = 10_000_000;
    let mode = (0..scheme.bin_count).max_by(|&a, &b| d.probs()[a].total_cmp(&d.probs()[b]).then(b.cmp(&a))).unwrap();
    let normal = Normal::new(0.0, 5.5f64.sqrt()).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
    let hits = (0..N).filter(|_| scheme.quantize(normal.sample(&mut rng)) == mode).count() as f64;
    let p = d.max_prob();
    let sigma = (p * (1.0 - p) / N as f64).sqrt();
    assert!((hits / N as f64 - p).abs() < 4.0 * sigma);
}

#[test]
fn guesswork_matches_monte_carlo_rank() {
    for (n_total, seed) in [(0.0, 1), (3.0, 2), (15.64, 3)] {
        let s = SplitScenario::new(n_total, 0.0, 200_000, seed);
        let summary = run_attack(&s).unwrap().tally.summary().unwrap();
        let d = binned_gaussian(0.0, s.alice_variance(), &s.binning).unwrap();
        let g = expected_guesswork(&d);
        let err = (summary.guesswork_unconditional - g).abs();
        assert!(err < 3.0 * summary.guesswork_unconditional_stderr, "{} vs {g}", summary.guesswork_unconditional);
    }
}
