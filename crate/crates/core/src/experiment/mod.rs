//! Monte-Carlo trials and learning-probability estimates.
//!
//! A trial builds one reservoir, trains its readout on a random stream and
//! scores it on a replay of that stream (`tr`) and on an independent stream
//! (`gr`). Aggregating trials gives the probability of perfect training (TP),
//! of perfect generalization (GP), and the learning probability (LP).

mod config;
mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturbation::{run_with_variation, VariationModel};
use crate::readout::{train_bits, Readout, ReadoutParams};
use crate::reservoir::{build_network, Network, NetworkConfig};
use crate::rng::{derive_seed, purpose};
use crate::tasks::{generate_streams, TaskKind, TaskSpec};

pub use config::ExperimentConfig;
pub use sweep::{grid_cells, sweep, write_sweep_csv, Axis, Cell, GridAxis, SweepResult, SWEEP_CSV_HEADER};

/// Default number of initial steps excluded from training and scoring.
pub const DEFAULT_WASHOUT: usize = 10;
pub const DEFAULT_LENGTH: usize = 1000;

/// Temporal-variation parameters; seeds are derived per trial and phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub n: usize,
    pub sigma: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { n: 1, sigma: 0.1 }
    }
}

impl NoiseSpec {
    pub fn model(&self, seed: u64) -> VariationModel {
        VariationModel {
            n: self.n,
            sigma: self.sigma,
            seed,
        }
    }
}

fn default_noise() -> Option<NoiseSpec> {
    Some(NoiseSpec::default())
}

fn default_washout() -> usize {
    DEFAULT_WASHOUT
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            kind: TaskKind::Nand,
            k: 5,
            length: DEFAULT_LENGTH,
            p: 0.5,
            seed: 0,
        }
    }
}

/// Everything needed to run one trial except its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSetup {
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub task: TaskSpec,
    #[serde(default)]
    pub readout: ReadoutParams,
    /// `None` runs the nominal, noise-free device.
    #[serde(default = "default_noise")]
    pub noise: Option<NoiseSpec>,
    #[serde(default = "default_washout")]
    pub washout: usize,
}

impl Default for TrialSetup {
    fn default() -> Self {
        TrialSetup {
            network: NetworkConfig::default(),
            task: TaskSpec::default(),
            readout: ReadoutParams::default(),
            noise: default_noise(),
            washout: DEFAULT_WASHOUT,
        }
    }
}

impl TrialSetup {
    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        self.readout.validate()?;
        self.network_config(0).validate()?;
        if self.washout >= self.task.length {
            return Err(Error::InvalidConfig(format!(
                "washout {} must be shorter than stream length {}",
                self.washout, self.task.length
            )));
        }
        Ok(())
    }

    /// Network configuration sized for the task, with the given seed.
    pub fn network_config(&self, seed: u64) -> NetworkConfig {
        NetworkConfig {
            n_inputs: self.task.k,
            n_outputs: self.task.n_outputs(),
            seed,
            ..self.network.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    /// Training accuracy.
    pub tr: f64,
    /// Generalization accuracy.
    pub gr: f64,
    pub seed: u64,
}

impl TrialMetrics {
    pub fn perfect_training(&self) -> bool {
        self.tr.floor() >= 1.0
    }

    pub fn perfect_generalization(&self) -> bool {
        self.gr.floor() >= 1.0
    }
}

/// A finished trial with the artifacts it produced.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub metrics: TrialMetrics,
    pub network: Network,
    pub readout: Readout,
}

/// Run one trial; every random draw derives from `seed`.
pub fn run_trial(setup: &TrialSetup, seed: u64) -> Result<TrialMetrics> {
    run_trial_detailed(setup, seed).map(|o| o.metrics)
}

pub fn run_trial_detailed(setup: &TrialSetup, seed: u64) -> Result<TrialOutcome> {
    setup.validate()?;
    let mut network = build_network(&setup.network_config(derive_seed(seed, purpose::NETWORK)))?;
    let train = generate_streams(&setup.task.with_seed(derive_seed(seed, purpose::TRAIN_STREAM)))?;
    let test = generate_streams(&setup.task.with_seed(derive_seed(seed, purpose::TEST_STREAM)))?;
    let noise = |p| setup.noise.map(|n| n.model(derive_seed(seed, p)));

    let train_inputs = train.inputs.to_real_rows();
    let train_noise = noise(purpose::TRAIN_NOISE);
    let traj = run_with_variation(&mut network, &train_inputs, setup.washout, train_noise.as_ref())?;
    let readout = train_bits(&traj, &train.targets, &setup.readout, network.output_mask())?;

    // Without noise the replay is identical to the training trajectory.
    let tr = match noise(purpose::REPLAY_NOISE) {
        Some(model) if model.n > 0 => {
            let replay = run_with_variation(&mut network, &train_inputs, setup.washout, Some(&model))?;
            readout.score(&replay, &train.targets)?
        }
        _ => readout.score(&traj, &train.targets)?,
    };

    let test_traj = run_with_variation(
        &mut network,
        &test.inputs.to_real_rows(),
        setup.washout,
        noise(purpose::TEST_NOISE).as_ref(),
    )?;
    let gr = readout.score(&test_traj, &test.targets)?;

    Ok(TrialOutcome {
        metrics: TrialMetrics { tr, gr, seed },
        network,
        readout,
    })
}

/// Run `trials` trials in parallel; trial `i` uses `derive_seed(base_seed, i)`.
pub fn run_trials(setup: &TrialSetup, trials: usize, base_seed: u64) -> Result<Vec<TrialMetrics>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(setup, derive_seed(base_seed, i)))
        .collect()
}

/// TP, GP and both readings of LP over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probabilities {
    pub tp: f64,
    pub gp: f64,
    /// Fraction of trials with both `tr = 1` and `gr = 1`.
    pub lp_joint: f64,
    /// `TP * GP`.
    pub lp_product: f64,
    pub trials: usize,
}

pub fn estimate_probabilities(metrics: &[TrialMetrics]) -> Result<Probabilities> {
    if metrics.is_empty() {
        return Err(Error::NoTrials);
    }
    let n = metrics.len() as f64;
    let count = |f: &dyn Fn(&TrialMetrics) -> bool| metrics.iter().filter(|m| f(m)).count() as f64 / n;
    let tp = count(&|m| m.perfect_training());
    let gp = count(&|m| m.perfect_generalization());
    let lp_joint = count(&|m| m.perfect_training() && m.perfect_generalization());
    Ok(Probabilities {
        tp,
        gp,
        lp_joint,
        lp_product: tp * gp,
        trials: metrics.len(),
    })
}

/// Joint 2-bit adder and 2-bit multiplier on one reservoir (4 inputs, 7 outputs).
pub fn adder_multiplier_setup() -> TrialSetup {
    TrialSetup {
        network: NetworkConfig {
            input_density: 0.5,
            output_density: 0.5,
            ..NetworkConfig::default()
        },
        task: TaskSpec {
            kind: TaskKind::AdderMultiplier,
            k: 4,
            ..TaskSpec::default()
        },
        ..TrialSetup::default()
    }
}

pub fn run_adder_multiplier(trials: usize, master_seed: u64) -> Result<SweepResult> {
    run_cell(&adder_multiplier_setup(), trials, master_seed)
}

/// One sweep cell without grid axes.
pub fn run_cell(setup: &TrialSetup, trials: usize, master_seed: u64) -> Result<SweepResult> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let cell = Cell { coords: Vec::new() };
    let metrics = run_trials(setup, trials, cell.seed(master_seed))?;
    Ok(SweepResult {
        cell,
        setup: setup.clone(),
        probabilities: estimate_probabilities(&metrics)?,
        master_seed,
    })
}
