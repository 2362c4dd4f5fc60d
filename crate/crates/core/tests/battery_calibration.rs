//! Behaviour of the statistical battery on good and bad generators.

use cvqrng_core::stat_tests::{run_battery, BatteryConfig, Verdict};
use rand::{Rng, SeedableRng};
use statrs::distribution::{ContinuousCDF, Uniform};

const STREAM_BITS: usize = 100_000;

fn good_stream(seed: u64) -> Vec<u8> {
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    (0..STREAM_BITS).map(|_| rng.random_range(0..2u8)).collect()
}

/// Per-test pass proportion over 100 independent good streams.
#[test]
fn good_generator_passes_each_test_at_least_95_percent() {
    let config = BatteryConfig::default();
    let reports: Vec<_> = (0..100).map(|s| run_battery(&good_stream(s), &config)).collect();
    for t in 0..reports[0].len() {
        let passed = reports.iter().filter(|r| r[t].verdict == Verdict::Passed).count();
        assert!(passed >= 95, "{}: {passed}/100", reports[0][t].test_name);
    }
}

#[test]
fn p_values_are_uniform_under_good_generator() {
    let config = BatteryConfig::default();
    let reports: Vec<_> = (1000..1200).map(|s| run_battery(&good_stream(s), &config)).collect();
    let n_sub = reports[0].iter().map(|r| r.sub_p_values.len()).collect::<Vec<_>>();
    let uniform = Uniform::new(0.0, 1.0).unwrap();
    for (t, &subs) in n_sub.iter().enumerate() {
        for k in 0..subs {
            let mut p: Vec<f64> = reports.iter().map(|r| r[t].sub_p_values[k]).collect();
            p.sort_by(f64::total_cmp);
            let n = p.len() as f64;
            let d = p
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let f = uniform.cdf(v);
                    (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
                })
                .fold(0.0, f64::max);
            // 1% critical value of the KS statistic, asymptotic form
            assert!(d < 1.628 / n.sqrt(), "{} #{k}: D = {d}", reports[0][t].test_name);
        }
    }
}

#[test]
fn biased_and_periodic_streams_fail() {
    let config = BatteryConfig::default();
    let zeros = run_battery(&vec![0u8; STREAM_BITS], &config);
    assert_eq!(zeros[0].test_name, "Frequency");
    assert_eq!(zeros[0].verdict, Verdict::Failed);

    let alternating: Vec<u8> = (0..STREAM_BITS).map(|i| (i % 2) as u8).collect();
    let r = run_battery(&alternating, &config);
    let runs = r.iter().find(|t| t.test_name == "Runs").unwrap();
    assert_eq!(runs.verdict, Verdict::Failed);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let biased: Vec<u8> = (0..STREAM_BITS).map(|_| rng.random_bool(0.52) as u8).collect();
    assert_eq!(run_battery(&biased, &config)[0].verdict, Verdict::Failed);
}

#[test]
fn reports_are_deterministic() {
    let bits = good_stream(42);
    assert_eq!(run_battery(&bits, &BatteryConfig::default()), run_battery(&bits, &BatteryConfig::default()));
}
