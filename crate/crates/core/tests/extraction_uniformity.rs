//! Output uniformity of the hash-and-merge extractor.

use cvqrng_core::eavesdropper::run_attack;
use cvqrng_core::entropy::binned_gaussian;
use cvqrng_core::extraction::{extract, hash_sample, split_merged, HashMatrix};
use cvqrng_core::SplitScenario;
use rand::{RngCore, SeedableRng};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let expected = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}

fn screened_for(s: &SplitScenario) -> HashMatrix {
    let marginal = binned_gaussian(0.0, s.alice_variance(), &s.binning).unwrap();
    HashMatrix::screened(4, 8, 1, marginal.probs(), 2e-3, 64).unwrap().0
}

#[test]
fn hashed_nibbles_are_uniform_for_high_entropy_scenarios() {
    // rows with conditional min-entropy of at least 4 bits
    for (i, (n_eve, n_alice)) in [(1.04, 14.60), (4.06, 9.64), (5.58, 5.12), (6.34, 3.87)].into_iter().enumerate() {
        let s = SplitScenario::from_photon_numbers(n_eve, n_alice, 200_000, 40 + i as u64);
        let m = screened_for(&s);
        let mut counts = [0u64; 16];
        for shot in run_attack(&s).unwrap().shots {
            counts[hash_sample(shot.alice_bin as u8, &m).unwrap() as usize] += 1;
        }
        let p = chi_square_p(&counts);
        assert!(p > 0.01, "row ({n_eve}, {n_alice}): p = {p}, {counts:?}");
    }
}

#[test]
fn merged_bytes_of_high_entropy_scenario_are_uniform() {
    let s = SplitScenario::from_photon_numbers(5.58, 5.12, 400_000, 3);
    let m = screened_for(&s);
    let samples: Vec<u8> = run_attack(&s).unwrap().shots.iter().map(|r| r.alice_bin as u8).collect();
    let mut counts = [0u64; 256];
    for b in extract(&samples, &m).unwrap() {
        counts[b as usize] += 1;
    }
    assert!(chi_square_p(&counts) > 0.01);
}

#[test]
fn uniform_source_stays_uniform_through_hash_and_merge() {
    let m = HashMatrix::random(4, 8, 2024).unwrap();
    assert_eq!(m.rank(), 4);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut samples = vec![0u8; 400_000];
    rng.fill_bytes(&mut samples);
    let merged = extract(&samples, &m).unwrap();
    assert_eq!(merged.len(), samples.len() / 2);

    let mut bytes = [0u64; 256];
    let mut high = [0u64; 16];
    let mut low = [0u64; 16];
    for &b in &merged {
        bytes[b as usize] += 1;
        let (h, l) = split_merged(b);
        high[h as usize] += 1;
        low[l as usize] += 1;
    }
    for counts in [&bytes[..], &high[..], &low[..]] {
        assert!(chi_square_p(counts) > 0.01);
    }
}
