//! Fault detection through an auxiliary channel, and retraining from memory.
//!
//! The teacher stores input/output pairs for every terminal. While the
//! device runs it feeds a stored pattern into the auxiliary inputs and
//! compares the auxiliary output with the stored answer. A mismatch takes the
//! device offline, and the readouts are re-solved by driving the (possibly
//! damaged) reservoir with the stored inputs.

mod recovery;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturbation::{run_with_variation, VariationModel};
use crate::readout::{train_bits, Readout, ReadoutParams};
use crate::reservoir::Network;
use crate::tasks::{BitMatrix, BitStreams};

pub use recovery::{
    run_recovery_experiment, summarize, write_recovery_csv, RecoveryConfig, RecoveryRecord, RecoverySettings,
    RecoverySummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeacherMode {
    Monitoring,
    Faulted,
    Retraining,
    Restored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub step: usize,
    pub expected: u8,
    pub observed: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherState {
    pub mode: TeacherMode,
    pub mismatch_log: Vec<Mismatch>,
    pub retrain_count: usize,
}

impl Default for TeacherState {
    fn default() -> Self {
        TeacherState {
            mode: TeacherMode::Monitoring,
            mismatch_log: Vec::new(),
            retrain_count: 0,
        }
    }
}

/// Stored streams for every input and output terminal.
///
/// Inputs are laid out main first, then auxiliary; outputs likewise.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherMemory {
    stored_inputs: BitMatrix,
    stored_targets: BitMatrix,
    aux_input_indices: Vec<usize>,
    aux_output_indices: Vec<usize>,
}

impl TeacherMemory {
    pub fn new(main: &BitStreams, aux: &BitStreams) -> Result<Self> {
        if main.len() != aux.len() {
            return Err(Error::Shape(format!(
                "main stream has {} steps, auxiliary stream {}",
                main.len(),
                aux.len()
            )));
        }
        if main.is_empty() {
            return Err(Error::EmptyInput);
        }
        let k_main = main.inputs.cols();
        let n_main = main.targets.cols();
        Ok(TeacherMemory {
            stored_inputs: main.inputs.hstack(&aux.inputs)?,
            stored_targets: main.targets.hstack(&aux.targets)?,
            aux_input_indices: (k_main..k_main + aux.inputs.cols()).collect(),
            aux_output_indices: (n_main..n_main + aux.targets.cols()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.stored_inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stored_inputs(&self) -> &BitMatrix {
        &self.stored_inputs
    }

    pub fn stored_targets(&self) -> &BitMatrix {
        &self.stored_targets
    }

    pub fn aux_input_indices(&self) -> &[usize] {
        &self.aux_input_indices
    }

    pub fn aux_output_indices(&self) -> &[usize] {
        &self.aux_output_indices
    }

    pub fn main_input_indices(&self) -> Vec<usize> {
        (0..self.stored_inputs.cols())
            .filter(|i| !self.aux_input_indices.contains(i))
            .collect()
    }

    pub fn main_output_indices(&self) -> Vec<usize> {
        (0..self.stored_targets.cols())
            .filter(|i| !self.aux_output_indices.contains(i))
            .collect()
    }

    /// Auxiliary input bits for step `t` of a cyclic replay.
    pub fn aux_inputs_at(&self, t: usize) -> Vec<u8> {
        let row = self.stored_inputs.row(t % self.len());
        self.aux_input_indices.iter().map(|&i| row[i]).collect()
    }

    /// Expected auxiliary output bits for input step `t` of a cyclic replay.
    pub fn aux_expected_at(&self, t: usize) -> Vec<u8> {
        let row = self.stored_targets.row(t % self.len());
        self.aux_output_indices.iter().map(|&i| row[i]).collect()
    }
}

/// The supervisory unit. It owns no network; callers pass one in.
#[derive(Debug, Clone)]
pub struct Teacher {
    pub memory: TeacherMemory,
    pub params: ReadoutParams,
    pub washout: usize,
    /// Consecutive mismatching steps needed to declare a fault.
    pub debounce: usize,
    state: TeacherState,
    streak: usize,
}

impl Teacher {
    pub fn new(memory: TeacherMemory, params: ReadoutParams, washout: usize) -> Self {
        Teacher {
            memory,
            params,
            washout,
            debounce: 1,
            state: TeacherState::default(),
            streak: 0,
        }
    }

    pub fn state(&self) -> &TeacherState {
        &self.state
    }

    pub fn mode(&self) -> TeacherMode {
        self.state.mode
    }

    fn require(&self, expected: TeacherMode) -> Result<()> {
        if self.state.mode == expected {
            Ok(())
        } else {
            Err(Error::TeacherMode {
                expected,
                actual: self.state.mode,
            })
        }
    }

    /// Compare one auxiliary output bit with its stored value.
    pub fn monitor_step(&mut self, observed: u8, expected: u8, t: usize) -> Result<TeacherMode> {
        self.require(TeacherMode::Monitoring)?;
        if observed == expected {
            self.streak = 0;
        } else {
            self.state.mismatch_log.push(Mismatch {
                step: t,
                expected,
                observed,
            });
            self.streak += 1;
            if self.streak >= self.debounce.max(1) {
                self.state.mode = TeacherMode::Faulted;
            }
        }
        Ok(self.state.mode)
    }

    /// Take the device offline without an auxiliary mismatch.
    pub fn declare_fault(&mut self) -> Result<()> {
        self.require(TeacherMode::Monitoring)?;
        self.state.mode = TeacherMode::Faulted;
        Ok(())
    }

    /// Fit readouts for every output on the stored streams.
    pub fn train_readout(&self, net: &mut Network, variation: Option<&VariationModel>) -> Result<Readout> {
        let inputs = self.memory.stored_inputs.to_real_rows();
        let traj = run_with_variation(net, &inputs, self.washout, variation)?;
        train_bits(&traj, &self.memory.stored_targets, &self.params, net.output_mask())
    }

    /// Re-solve every readout on the current (possibly faulted) reservoir.
    /// The reservoir weights are left untouched; only its state changes.
    pub fn retrain(&mut self, net: &mut Network, variation: Option<&VariationModel>) -> Result<Readout> {
        self.require(TeacherMode::Faulted)?;
        self.state.mode = TeacherMode::Retraining;
        match self.train_readout(net, variation) {
            Ok(readout) => {
                self.state.retrain_count += 1;
                self.state.mode = TeacherMode::Restored;
                Ok(readout)
            }
            Err(e) => {
                self.state.mode = TeacherMode::Faulted;
                Err(e)
            }
        }
    }

    /// Reconnect after a successful retrain.
    pub fn resume(&mut self) -> Result<()> {
        self.require(TeacherMode::Restored)?;
        self.state.mode = TeacherMode::Monitoring;
        self.streak = 0;
        Ok(())
    }
}
