//! The subcommands. Each writes into its own run directory and finishes by
//! writing the manifest.

use std::path::{Path, PathBuf};

use cvqrng_core::extraction::{pack_bits, unpack_bits};
use cvqrng_core::phase_space::with_workers;
use cvqrng_core::stat_tests::{run_battery, TestReport};
use serde::{Deserialize, Serialize};

use crate::config::Injection;
use crate::manifest::{file_digest, Command, RunManifest, ScenarioEntry, MANIFEST_FILE};
use crate::output::{self, BITSTREAM_FILE, METRICS_FILE, RESULTS_FILE, STAT_TESTS_FILE};
use crate::reference_rows::{log_grid, REFERENCE_ROWS};
use crate::run::run_scenario;
use crate::{ExperimentError, Result, RunConfig, ScenarioResult};

/// Contents of `results.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub command: Command,
    pub scenarios: Vec<ScenarioResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stat_tests: Option<Vec<TestReport>>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub results: RunResults,
}

pub fn cmd_sweep_table2(config: &RunConfig, dir: &Path) -> Result<RunOutput> {
    let rows = config.rows.clone().unwrap_or_else(|| REFERENCE_ROWS.to_vec());
    run_rows(Command::SweepTable2, config, &rows, dir)
}

/// Conditional min-entropy against `n_eve` at fixed `n_alice`.
pub fn cmd_fig3(config: &RunConfig, dir: &Path) -> Result<RunOutput> {
    let f = &config.fig3;
    let rows: Vec<_> = log_grid(f.n_eve_min, f.n_eve_max, f.points).into_iter().map(|e| (e, f.n_alice)).collect();
    run_rows(Command::Fig3, config, &rows, dir)
}

pub fn cmd_single(config: &RunConfig, dir: &Path) -> Result<RunOutput> {
    run_rows(Command::Single, config, &[(config.single.n_eve, config.single.n_alice)], dir)
}

/// Extracts bits from the `single` scenario, attacks the merged numbers and
/// runs the statistical battery over the bitstream.
pub fn cmd_extract_and_test(config: &RunConfig, dir: &Path) -> Result<RunOutput> {
    let config = RunConfig { extraction: true, ..config.clone() };
    config.validate()?;
    in_pool(&config, || {
        let mut manifest = RunManifest::new(Command::ExtractTest, &config);
        prepare_dir(dir)?;
        let out = run_scenario(&config, 0, config.single.n_eve, config.single.n_alice)?;
        let merged = out.merged.as_deref().unwrap_or_default();
        let bits = match config.inject {
            None => unpack_bits(merged),
            Some(kind) => injected(kind, merged.len() * 8),
        };
        let reports = run_battery(&bits, &config.battery);

        output::write_bytes(&dir.join(BITSTREAM_FILE), &pack_bits(&bits))?;
        output::write_stat_tests(&dir.join(STAT_TESTS_FILE), &reports)?;
        if config.dump_shots {
            write_dump(dir, &mut manifest, 0, &out.attack)?;
        }
        manifest.scenarios.push(entry(&out.result));
        let results =
            RunResults { command: Command::ExtractTest, scenarios: vec![out.result], stat_tests: Some(reports) };
        finish(dir, manifest, results, &[BITSTREAM_FILE, STAT_TESTS_FILE])
    })
}

fn injected(kind: Injection, len: usize) -> Vec<u8> {
    match kind {
        Injection::Zeros => vec![0; len],
        Injection::Alternating => (0..len).map(|i| (i % 2) as u8).collect(),
    }
}

fn run_rows(command: Command, config: &RunConfig, rows: &[(f64, f64)], dir: &Path) -> Result<RunOutput> {
    config.validate()?;
    in_pool(config, || {
        let mut manifest = RunManifest::new(command, config);
        prepare_dir(dir)?;
        let mut scenarios = Vec::with_capacity(rows.len());
        for (i, &(n_eve, n_alice)) in rows.iter().enumerate() {
            let out = run_scenario(config, i, n_eve, n_alice)?;
            if config.dump_shots {
                write_dump(dir, &mut manifest, i, &out.attack)?;
            }
            manifest.scenarios.push(entry(&out.result));
            scenarios.push(out.result);
        }
        finish(dir, manifest, RunResults { command, scenarios, stat_tests: None }, &[])
    })
}

fn in_pool<R: Send>(config: &RunConfig, f: impl FnOnce() -> R + Send) -> R {
    if config.workers == 0 {
        f()
    } else {
        with_workers(config.workers, f)
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))
}

fn entry(r: &ScenarioResult) -> ScenarioEntry {
    ScenarioEntry {
        index: r.index,
        n_eve: r.metrics.n_eve,
        n_alice: r.metrics.n_alice,
        seed: r.scenario.seed,
        shots: r.scenario.shots,
        hash: r.hash.clone(),
    }
}

fn write_dump(
    dir: &Path,
    manifest: &mut RunManifest,
    index: usize,
    attack: &cvqrng_core::eavesdropper::AttackRun,
) -> Result<()> {
    let name = output::shots_file(index);
    output::write_shots(&dir.join(&name), attack)?;
    manifest.record_output(dir, &name)
}

fn finish(dir: &Path, mut manifest: RunManifest, results: RunResults, extra: &[&str]) -> Result<RunOutput> {
    let rows: Vec<_> = results.scenarios.iter().map(|s| s.metrics.clone()).collect();
    output::write_metrics(&dir.join(METRICS_FILE), &rows)?;
    output::write_json(&dir.join(RESULTS_FILE), &results)?;
    for name in [METRICS_FILE, RESULTS_FILE].iter().chain(extra) {
        manifest.record_output(dir, name)?;
    }
    manifest.finish(dir)?;
    Ok(RunOutput { dir: dir.to_path_buf(), manifest, results })
}

/// Why one output failed replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub workers: usize,
    pub matched: Vec<String>,
    pub divergent: Vec<Divergence>,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.divergent.is_empty() && !self.matched.is_empty()
    }
}

/// Re-executes the run recorded in `dir` on `workers` threads (0 = all
/// cores) and checks every listed output, both as stored and as
/// regenerated, against the manifest digests.
pub fn cmd_replay(dir: &Path, workers: usize) -> Result<ReplayReport> {
    let manifest = RunManifest::load(dir)?;
    let config = RunConfig { workers, ..manifest.config.clone() };
    let scratch = dir.join(format!(".replay-{workers}"));
    if scratch.exists() {
        std::fs::remove_dir_all(&scratch).map_err(|e| ExperimentError::io(&scratch, e))?;
    }
    let rerun = match manifest.command {
        Command::SweepTable2 => cmd_sweep_table2(&config, &scratch),
        Command::Fig3 => cmd_fig3(&config, &scratch),
        Command::Single => cmd_single(&config, &scratch),
        Command::ExtractTest => cmd_extract_and_test(&config, &scratch),
    };
    let outcome = rerun.map(|r| compare(dir, &manifest, &r.manifest, workers));
    std::fs::remove_dir_all(&scratch).map_err(|e| ExperimentError::io(&scratch, e))?;
    outcome
}

fn compare(dir: &Path, recorded: &RunManifest, regenerated: &RunManifest, workers: usize) -> ReplayReport {
    let mut matched = Vec::new();
    let mut divergent = Vec::new();
    for (name, digest) in &recorded.outputs {
        let on_disk = match file_digest(&dir.join(name)) {
            Ok(d) => d,
            Err(e) => {
                divergent.push(Divergence { file: name.clone(), reason: e.to_string() });
                continue;
            }
        };
        let reason = if &on_disk != digest {
            Some("stored file does not match its recorded digest")
        } else {
            match regenerated.outputs.get(name) {
                None => Some("not produced by the replay"),
                Some(d) if d != digest => Some("replay produced different content"),
                Some(_) => None,
            }
        };
        match reason {
            Some(r) => divergent.push(Divergence { file: name.clone(), reason: r.into() }),
            None => matched.push(name.clone()),
        }
    }
    for name in regenerated.outputs.keys() {
        if !recorded.outputs.contains_key(name) && name != MANIFEST_FILE {
            divergent.push(Divergence { file: name.clone(), reason: "produced by the replay but not recorded".into() });
        }
    }
    ReplayReport { workers, matched, divergent }
}
