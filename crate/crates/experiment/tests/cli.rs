//! Run-directory plumbing: replay verdicts, config diagnostics and the binary.

use std::process::Command;

use cvqrng_experiment::commands::{cmd_replay, cmd_single, cmd_sweep_table2};
use cvqrng_experiment::manifest::{RunManifest, MANIFEST_FILE};
use cvqrng_experiment::output::{read_metrics, read_shots, METRICS_FILE, RESULTS_FILE};
use cvqrng_experiment::{ExperimentError, RunConfig};

fn small() -> RunConfig {
    RunConfig { shots: 4_000, rows: Some(vec![(5.58, 5.12), (7.09, 2.28)]), ..Default::default() }
}

#[test]
fn untouched_run_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_sweep_table2(&small(), dir.path()).unwrap();
    assert_eq!(out.manifest.outputs.len(), 2);
    let r = cmd_replay(dir.path(), 3).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(!dir.path().join(".replay-3").exists());
}

#[test]
fn corrupted_byte_is_reported_by_file() {
    let dir = tempfile::tempdir().unwrap();
    cmd_sweep_table2(&small(), dir.path()).unwrap();
    let path = dir.path().join(METRICS_FILE);
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 2;
    bytes[last] ^= 1;
    std::fs::write(&path, bytes).unwrap();
    let r = cmd_replay(dir.path(), 1).unwrap();
    assert!(!r.passed());
    assert_eq!(r.divergent.len(), 1);
    assert_eq!(r.divergent[0].file, METRICS_FILE);
    assert_eq!(r.matched, vec![RESULTS_FILE.to_string()]);
}

#[test]
fn changed_seed_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    cmd_sweep_table2(&small(), dir.path()).unwrap();
    let mut m = RunManifest::load(dir.path()).unwrap();
    m.config.seed += 1;
    std::fs::write(dir.path().join(MANIFEST_FILE), serde_json::to_string(&m).unwrap()).unwrap();
    let r = cmd_replay(dir.path(), 1).unwrap();
    assert!(!r.passed());
    let files: Vec<_> = r.divergent.iter().map(|d| d.file.as_str()).collect();
    assert_eq!(files, vec![METRICS_FILE, RESULTS_FILE]);
}

#[test]
fn forced_no_tap_leaves_nothing_to_learn() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { force_no_tap: true, extraction: false, shots: 50_000, ..small() };
    let out = cmd_sweep_table2(&cfg, dir.path()).unwrap();
    for s in &out.results.scenarios {
        let m = &s.metrics;
        let sigma = s.summary.guesswork_conditional_stderr.hypot(s.summary.guesswork_unconditional_stderr);
        assert!((m.guesswork_conditional - m.guesswork_unconditional).abs() <= 2.0 * sigma);
        assert!((m.h_min_conditional - m.h_min_unconditional).abs() < 1e-12);
    }
}

#[test]
fn metrics_and_shot_dump_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { dump_shots: true, shots: 3_000, ..Default::default() };
    let out = cmd_single(&cfg, dir.path()).unwrap();
    let rows = read_metrics(&dir.path().join(METRICS_FILE)).unwrap();
    assert_eq!(rows, vec![out.results.scenarios[0].metrics.clone()]);
    let shots = read_shots(&dir.path().join("shots_000.bin")).unwrap();
    assert_eq!(shots.len(), 3_000);
    assert!(shots.iter().enumerate().all(|(i, s)| s.shot_index == i as u64 && s.rank >= 1));
}

#[test]
fn table_row_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        shots: 200_000,
        extraction: false,
        rows: Some(vec![(1.04, 14.60), (8.05, 0.22)]),
        ..Default::default()
    };
    let out = cmd_sweep_table2(&cfg, dir.path()).unwrap();
    let (first, last) = (&out.results.scenarios[0], &out.results.scenarios[1]);
    let d = cvqrng_core::entropy::binned_gaussian(0.0, 15.10, &cvqrng_core::BinningScheme::default()).unwrap();
    let analytic = cvqrng_core::entropy::min_entropy(&d);
    assert!((first.metrics.h_min_unconditional - analytic).abs() < 0.03);
    assert!((last.metrics.h_min_conditional - 3.51).abs() < 0.1);
    // theory and experiment agree within 3 binomial sigma of the hit rate
    for s in &out.results.scenarios {
        for (hit, theory) in [
            (&s.hit_rate_unconditional, s.theory.h_min_unconditional),
            (&s.hit_rate_conditional, s.theory.h_min_conditional),
        ] {
            let p = 2f64.powf(-theory);
            let n = s.summary.shots as f64;
            let sigma_bits = ((1.0 - p) / (n * p)).sqrt() / std::f64::consts::LN_2;
            assert!((hit.bits - theory).abs() <= 3.0 * sigma_bits, "{} vs {theory}", hit.bits);
        }
    }
}

#[test]
fn invalid_config_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { shots: 1, ..Default::default() };
    match cmd_single(&cfg, dir.path()) {
        Err(ExperimentError::Config { key, .. }) => assert_eq!(key, "shots"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_cvqrng");
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");

    let ok = Command::new(exe)
        .args(["single", "--shots", "2000", "--seed", "5", "--coherence-ratio", "inf", "--out-dir"])
        .arg(&run)
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let replay = Command::new(exe).args(["replay", "--workers", "1,2", "--out-dir"]).arg(&run).output().unwrap();
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stdout));

    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"electronic_noise_factor": 0.2}"#).unwrap();
    let bad = Command::new(exe).args(["single", "--config"]).arg(&config).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("electronic_noise_factor"));

    let missing = Command::new(exe).args(["replay", "--out-dir"]).arg(dir.path().join("nope")).output().unwrap();
    assert!(!missing.status.success());
}
