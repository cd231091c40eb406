//! Fault-injection experiment: train, run, disconnect nodes mid-stream,
//! detect through the auxiliary channel, retrain, and score the main output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Teacher, TeacherMemory, TeacherMode};
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, NoiseSpec};
use crate::perturbation::{apply_fault, run_with_variation, step_varied, FaultEvent};
use crate::readout::{Readout, ReadoutParams};
use crate::reservoir::{build_network, NetworkConfig};
use crate::rng::{derive_path, derive_seed, purpose};
use crate::tasks::{evaluate_accuracy, generate_streams, BitMatrix, TaskKind, TaskSpec};

fn default_m_values() -> Vec<usize> {
    vec![1, 2, 3, 4]
}

/// Knobs specific to the recovery experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoverySettings {
    pub m_values: Vec<usize>,
    pub repeats: usize,
    pub t_fail: usize,
    pub test_length: usize,
    pub debounce: usize,
    /// Retrain at the end of the run even when no fault was flagged, so the
    /// post-retrain score is measured for every repeat.
    pub retrain_undetected: bool,
}

impl Default for RecoverySettings {
    fn default() -> Self {
        RecoverySettings {
            m_values: default_m_values(),
            repeats: 20,
            t_fail: 700,
            test_length: 1000,
            debounce: 1,
            retrain_undetected: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub network: NetworkConfig,
    pub readout: ReadoutParams,
    pub noise: Option<NoiseSpec>,
    pub washout: usize,
    pub main_task: TaskKind,
    pub aux_task: TaskKind,
    /// Bits per channel.
    pub k: usize,
    /// Stored stream length, used for both training and retraining.
    pub train_length: usize,
    pub settings: RecoverySettings,
    pub master_seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig::from_experiment(&ExperimentConfig::default())
    }
}

impl RecoveryConfig {
    /// Take network, readout, noise and seeding from a general config;
    /// both channels run 2-input NAND.
    pub fn from_experiment(cfg: &ExperimentConfig) -> Self {
        RecoveryConfig {
            network: cfg.setup.network.clone(),
            readout: cfg.setup.readout,
            noise: cfg.setup.noise,
            washout: cfg.setup.washout,
            main_task: TaskKind::Nand,
            aux_task: TaskKind::Nand,
            k: 2,
            train_length: cfg.setup.task.length,
            settings: cfg.recovery.clone(),
            master_seed: cfg.master_seed,
        }
    }

    fn task(&self, kind: TaskKind, length: usize, seed: u64) -> Result<TaskSpec> {
        TaskSpec::new(kind, self.k, length, seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.readout.validate()?;
        let s = &self.settings;
        if s.t_fail >= s.test_length {
            return Err(Error::InvalidConfig(format!(
                "t_fail {} must precede the end of the {}-step test",
                s.t_fail, s.test_length
            )));
        }
        if self.washout >= self.train_length.min(s.test_length) {
            return Err(Error::InvalidConfig(format!("washout {} too long", self.washout)));
        }
        if let Some(&m) = s.m_values.iter().find(|&&m| m > self.network.nodes) {
            return Err(Error::InvalidConfig(format!("cannot fail {m} of {} nodes", self.network.nodes)));
        }
        self.task(self.main_task, 1, 0)?;
        self.task(self.aux_task, 1, 0)?;
        Ok(())
    }
}

/// Outcome of one repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRecord {
    pub m: usize,
    pub repeat: usize,
    /// A mismatch was flagged at or after the fault step.
    pub detected: bool,
    pub detect_latency_steps: Option<usize>,
    /// Mismatches flagged before the fault was injected.
    pub false_alarms: usize,
    pub retrain_count: usize,
    /// Main-output accuracy on a replay of the stored stream.
    pub post_retrain_training_accuracy: f64,
    /// Main-output accuracy on a fresh stream.
    pub post_retrain_accuracy: f64,
    pub post_retrain_perfect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub m: usize,
    pub repeats: usize,
    pub detection_rate: f64,
    pub mean_latency: Option<f64>,
    pub false_alarm_rate: f64,
    pub post_retrain_lp: f64,
}

/// Run every `(m, repeat)` pair; repeats run in parallel.
pub fn run_recovery_experiment(config: &RecoveryConfig) -> Result<Vec<RecoveryRecord>> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = config
        .settings
        .m_values
        .iter()
        .flat_map(|&m| (0..config.settings.repeats).map(move |r| (m, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(m, repeat)| run_repeat(config, m, repeat))
        .collect()
}

fn noise_at(config: &RecoveryConfig, seed: u64, keys: &[u64]) -> Option<crate::perturbation::VariationModel> {
    config.noise.map(|n| n.model(derive_path(seed, keys)))
}

fn run_repeat(config: &RecoveryConfig, m: usize, repeat: usize) -> Result<RecoveryRecord> {
    let s = &config.settings;
    let seed = derive_path(config.master_seed, &[m as u64, repeat as u64]);
    let mut net = build_network(&NetworkConfig {
        n_inputs: 2 * config.k,
        n_outputs: config.main_task.n_outputs() + config.aux_task.n_outputs(),
        seed: derive_seed(seed, purpose::NETWORK),
        ..config.network.clone()
    })?;

    let main = generate_streams(&config.task(
        config.main_task,
        config.train_length,
        derive_seed(seed, purpose::TRAIN_STREAM),
    )?)?;
    let aux = generate_streams(&config.task(
        config.aux_task,
        config.train_length,
        derive_seed(seed, purpose::AUX_STREAM),
    )?)?;
    let mut teacher = Teacher::new(TeacherMemory::new(&main, &aux)?, config.readout, config.washout);
    teacher.debounce = s.debounce;
    let mut readout = teacher.train_readout(&mut net, noise_at(config, seed, &[purpose::TRAIN_NOISE]).as_ref())?;

    let test = generate_streams(&config.task(
        config.main_task,
        s.test_length,
        derive_seed(seed, purpose::TEST_STREAM),
    )?)?;
    let fault = FaultEvent::sample(m, s.t_fail, net.nodes(), derive_seed(seed, purpose::FAULT))?;
    let test_noise = noise_at(config, seed, &[purpose::TEST_NOISE]);
    let aux_cols = teacher.memory.aux_output_indices().to_vec();
    let tau = config.readout.tau;

    let mut detection = None;
    let mut false_alarms = 0;
    net.reset_state();
    for t in 0..s.test_length {
        if t == s.t_fail {
            apply_fault(&mut net, &fault)?;
        }
        let mut u: Vec<f64> = test.inputs.row(t).iter().map(|&b| f64::from(b)).collect();
        u.extend(teacher.memory.aux_inputs_at(t).iter().map(|&b| f64::from(b)));
        step_varied(&mut net, &u, test_noise.as_ref(), t as u64)?;
        if t < config.washout || t + 1 < tau {
            continue;
        }
        let analog = readout.output_for_state(net.state());
        let expected = teacher.memory.aux_expected_at(t + 1 - tau);
        let mut mode = TeacherMode::Monitoring;
        for (&col, &want) in aux_cols.iter().zip(&expected) {
            let got = u8::from(analog[col] >= readout.theta);
            mode = teacher.monitor_step(got, want, t)?;
            if mode == TeacherMode::Faulted {
                break;
            }
        }
        if mode == TeacherMode::Faulted {
            if t < s.t_fail {
                false_alarms += 1;
            } else if detection.is_none() {
                detection = Some(t - s.t_fail);
            }
            let retrain_noise = noise_at(config, seed, &[purpose::RETRAIN_NOISE, teacher.state().retrain_count as u64]);
            readout = teacher.retrain(&mut net, retrain_noise.as_ref())?;
            teacher.resume()?;
        }
    }
    if detection.is_none() && s.retrain_undetected {
        teacher.declare_fault()?;
        let retrain_noise = noise_at(config, seed, &[purpose::RETRAIN_NOISE, teacher.state().retrain_count as u64]);
        readout = teacher.retrain(&mut net, retrain_noise.as_ref())?;
        teacher.resume()?;
    }

    let main_cols = teacher.memory.main_output_indices();
    let replay = run_with_variation(
        &mut net,
        &teacher.memory.stored_inputs().to_real_rows(),
        config.washout,
        noise_at(config, seed, &[purpose::REPLAY_NOISE]).as_ref(),
    )?;
    let tr = main_accuracy(&readout, &replay, teacher.memory.stored_targets(), &main_cols)?;

    let fresh = generate_streams(&config.task(
        config.main_task,
        s.test_length,
        derive_seed(seed, purpose::POST_TEST_STREAM),
    )?)?;
    let n = fresh.len();
    let aux_inputs = BitMatrix::from_rows(&(0..n).map(|t| teacher.memory.aux_inputs_at(t)).collect::<Vec<_>>())?;
    let aux_targets = BitMatrix::from_rows(&(0..n).map(|t| teacher.memory.aux_expected_at(t)).collect::<Vec<_>>())?;
    let traj = run_with_variation(
        &mut net,
        &fresh.inputs.hstack(&aux_inputs)?.to_real_rows(),
        config.washout,
        noise_at(config, seed, &[purpose::POST_TEST_NOISE]).as_ref(),
    )?;
    let gr = main_accuracy(&readout, &traj, &fresh.targets.hstack(&aux_targets)?, &main_cols)?;

    Ok(RecoveryRecord {
        m,
        repeat,
        detected: detection.is_some(),
        detect_latency_steps: detection,
        false_alarms,
        retrain_count: teacher.state().retrain_count,
        post_retrain_training_accuracy: tr,
        post_retrain_accuracy: gr,
        post_retrain_perfect: tr >= 1.0 && gr >= 1.0,
    })
}

fn main_accuracy(
    readout: &Readout,
    traj: &crate::reservoir::StateTrajectory,
    targets: &BitMatrix,
    main_cols: &[usize],
) -> Result<f64> {
    let (predicted, expected) = readout.aligned_bits(traj, targets)?;
    evaluate_accuracy(&predicted.select_columns(main_cols), &expected.select_columns(main_cols))
}

/// Per-`m` detection rate and post-retrain LP, in first-seen order of `m`.
pub fn summarize(records: &[RecoveryRecord]) -> Vec<RecoverySummary> {
    let mut ms: Vec<usize> = Vec::new();
    for r in records {
        if !ms.contains(&r.m) {
            ms.push(r.m);
        }
    }
    ms.into_iter()
        .map(|m| {
            let group: Vec<&RecoveryRecord> = records.iter().filter(|r| r.m == m).collect();
            let n = group.len() as f64;
            let latencies: Vec<f64> = group.iter().filter_map(|r| r.detect_latency_steps).map(|l| l as f64).collect();
            RecoverySummary {
                m,
                repeats: group.len(),
                detection_rate: group.iter().filter(|r| r.detected).count() as f64 / n,
                mean_latency: (!latencies.is_empty()).then(|| latencies.iter().sum::<f64>() / latencies.len() as f64),
                false_alarm_rate: group.iter().filter(|r| r.false_alarms > 0).count() as f64 / n,
                post_retrain_lp: group.iter().filter(|r| r.post_retrain_perfect).count() as f64 / n,
            }
        })
        .collect()
}

pub fn write_recovery_csv<W: Write>(records: &[RecoveryRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "m",
        "repeat",
        "detected",
        "detect_latency_steps",
        "post_retrain_accuracy",
        "post_retrain_perfect",
    ])?;
    for r in records {
        out.write_record([
            r.m.to_string(),
            r.repeat.to_string(),
            u8::from(r.detected).to_string(),
            r.detect_latency_steps.map_or_else(String::new, |l| l.to_string()),
            r.post_retrain_accuracy.to_string(),
            u8::from(r.post_retrain_perfect).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
