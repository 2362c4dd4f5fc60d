//! The run manifest: what was run, and a digest of every file it produced.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::run::HashRecord;
use crate::{ExperimentError, Result, RunConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SweepTable2,
    Fig3,
    ExtractTest,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub index: usize,
    pub n_eve: f64,
    pub n_alice: f64,
    pub seed: u64,
    pub shots: u64,
    pub hash: Option<HashRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Command,
    pub master_seed: u64,
    pub config: RunConfig,
    pub scenarios: Vec<ScenarioEntry>,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
    /// File name (relative to the run directory) to hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: Command, config: &RunConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            master_seed: config.seed,
            config: config.clone(),
            scenarios: Vec::new(),
            started_at: now(),
            finished_at: 0,
            outputs: BTreeMap::new(),
        }
    }

    /// Digests `name` inside `dir` and adds it to the inventory.
    pub fn record_output(&mut self, dir: &Path, name: &str) -> Result<()> {
        self.outputs.insert(name.to_string(), file_digest(&dir.join(name))?);
        Ok(())
    }

    pub fn finish(&mut self, dir: &Path) -> Result<()> {
        self.finished_at = now();
        crate::output::write_json(&dir.join(MANIFEST_FILE), self)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| ExperimentError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|source| ExperimentError::Json { path, source })
    }
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| ExperimentError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
