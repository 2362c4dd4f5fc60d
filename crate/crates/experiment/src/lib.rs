//! Sweep orchestration, persistence and replay for the attack simulator.
//!
//! Every command takes a [`RunConfig`], writes its outputs into one run
//! directory and records them, with SHA-256 digests, in a `manifest.json`.
//! [`commands::cmd_replay`] re-executes the recorded configuration and checks
//! that every output is reproduced byte for byte.

pub mod commands;
pub mod config;
mod error;
pub mod manifest;
pub mod output;
pub mod reference_rows;
pub mod run;

pub use config::RunConfig;
pub use error::{ExperimentError, Result};
pub use manifest::RunManifest;
pub use run::{MetricsRow, ScenarioResult};
