//! Echo-state networks trained as Boolean logic devices.
//!
//! A fixed random reservoir is driven by bit streams and a linear readout is
//! fitted in closed form. Around that core sit yield estimation over many
//! random reservoirs, per-step weight noise, node faults, and a teacher that
//! detects faults and retrains the readouts.

pub mod error;
pub mod experiment;
pub mod io;
pub mod perturbation;
pub mod readout;
pub mod reservoir;
pub mod rng;
pub mod tasks;
pub mod teacher;

pub use error::{Error, Result};
pub use experiment::{
    estimate_probabilities, run_trial, sweep, ExperimentConfig, Probabilities, TrialMetrics, TrialSetup,
};
pub use readout::{train, Readout, ReadoutParams, SignMode};
pub use reservoir::{build_network, Network, NetworkConfig, Transfer, WeightPattern};
pub use tasks::{generate_streams, BitMatrix, TaskKind, TaskSpec};
