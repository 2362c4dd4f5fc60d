use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use cvqrng_experiment::commands::{
    cmd_extract_and_test, cmd_fig3, cmd_replay, cmd_single, cmd_sweep_table2, RunOutput,
};
use cvqrng_experiment::config::FULL_SCALE_SHOTS;
use cvqrng_experiment::RunConfig;

/// Thermal-light homodyne QRNG under a heterodyne eavesdropping attack.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the fifteen reference splitting ratios.
    SweepTable2(Common),
    /// Conditional min-entropy against Eve's photon number at fixed n_alice.
    Fig3(Common),
    /// Hash one scenario's samples, attack the merged numbers and test the bits.
    ExtractTest(Common),
    /// Run a single scenario.
    Single {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_eve: Option<f64>,
        #[arg(long)]
        n_alice: Option<f64>,
    },
    /// Re-run a recorded run and verify its outputs byte for byte.
    Replay {
        /// Run directory containing manifest.json.
        #[arg(long, default_value = "run")]
        out_dir: PathBuf,
        /// Worker counts to replay with.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        workers: Vec<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with = "paper_scale")]
    shots: Option<u64>,
    /// Use the full campaign's shot count.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, default_value = "run")]
    out_dir: PathBuf,
    #[arg(long)]
    electronic_noise: Option<f64>,
    /// Pulse spacing over coherence time; "inf" means independent shots.
    #[arg(long)]
    coherence_ratio: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Write every scenario's raw shots.
    #[arg(long)]
    dump_shots: bool,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.shots {
            c.shots = v;
        }
        if self.paper_scale {
            c.shots = FULL_SCALE_SHOTS;
        }
        if let Some(v) = self.electronic_noise {
            c.electronic_noise_factor = v;
        }
        if let Some(v) = self.coherence_ratio {
            c.coherence_ratio = (!v.is_infinite()).then_some(v);
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        c.dump_shots |= self.dump_shots;
        c.validate()?;
        Ok(c)
    }
}

fn report(out: &RunOutput) {
    println!("wrote {} files to {}", out.manifest.outputs.len() + 1, out.dir.display());
    for s in &out.results.scenarios {
        let m = &s.metrics;
        print!(
            "n_eve {:>8.3}  n_alice {:>6.2}  H_min {:.3} -> {:.3}  G {:.2} -> {:.2}",
            m.n_eve,
            m.n_alice,
            m.h_min_unconditional,
            m.h_min_conditional,
            m.guesswork_unconditional,
            m.guesswork_conditional
        );
        if let (Some(gi), Some(gm)) = (m.g_ind, m.g_merged) {
            print!("  g_ind {gi:.1}  g_merged {gm:.1}");
        }
        println!();
    }
    for r in out.results.stat_tests.iter().flatten() {
        match r.p_value {
            Some(p) => println!("{:<20} p = {p:.6}  {:?}", r.test_name, r.verdict),
            None => println!("{:<20} {:?}", r.test_name, r.verdict),
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let out = match cli.command {
        Cmd::SweepTable2(c) => cmd_sweep_table2(&c.resolve()?, &c.out_dir)?,
        Cmd::Fig3(c) => cmd_fig3(&c.resolve()?, &c.out_dir)?,
        Cmd::ExtractTest(c) => cmd_extract_and_test(&c.resolve()?, &c.out_dir)?,
        Cmd::Single { common, n_eve, n_alice } => {
            let mut c = common.resolve()?;
            c.single.n_eve = n_eve.unwrap_or(c.single.n_eve);
            c.single.n_alice = n_alice.unwrap_or(c.single.n_alice);
            c.validate()?;
            cmd_single(&c, &common.out_dir)?
        }
        Cmd::Replay { out_dir, workers } => {
            let mut ok = true;
            for w in workers {
                let r = cmd_replay(&out_dir, w).with_context(|| format!("replay with {w} workers"))?;
                for d in &r.divergent {
                    println!("workers {w}: {} diverged: {}", d.file, d.reason);
                }
                println!(
                    "workers {w}: {} of {} outputs reproduced",
                    r.matched.len(),
                    r.matched.len() + r.divergent.len()
                );
                ok &= r.passed();
            }
            return Ok(ok);
        }
    };
    report(&out);
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
