//! Simulation of a thermal-light homodyne quantum random number generator
//! under a heterodyne eavesdropping attack.
//!
//! The crate is organised bottom-up:
//!
//! - [`binning`], [`state`], [`scenario`] and [`phase_space`] describe the
//!   Gaussian light fields, the beam-splitter tap and the detectors.
//! - [`eavesdropper`] turns Eve's heterodyne record into a conditional
//!   prediction of Alice's binned outcome and ranks guesses.
//! - [`entropy`] holds min-entropy and guesswork measures plus the
//!   analytic binned-Gaussian oracle.
//! - [`extraction`] implements GF(2) hashing, nibble merging and the
//!   merged-number attack.
//! - [`stat_tests`] is a small NIST-style statistical battery.
//!
//! Quadratures use the convention where the vacuum has Wigner variance 0.5
//! per quadrature, so a thermal state of mean photon number `n` has variance
//! `n + 0.5`.

pub mod binning;
pub mod eavesdropper;
pub mod entropy;
mod error;
pub mod extraction;
pub mod gaussian;
pub mod phase_space;
pub mod rng;
pub mod scenario;
pub mod state;

pub use binning::BinningScheme;
pub use eavesdropper::{ConditionalPrediction, Conditioner, GuessRecord};
pub use entropy::{AttackSummary, AttackTally, DiscreteDistribution};
pub use error::{Error, Result};
pub use extraction::{HashMatrix, MergedGuessSummary};
pub use phase_space::ShotRecord;
pub use scenario::SplitScenario;
pub use state::GaussianModeState;
