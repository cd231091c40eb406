//! JSON experiment configuration shared by the command-line tools.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GridAxis, TrialSetup};
use crate::error::Result;
use crate::teacher::RecoverySettings;

fn default_trials() -> usize {
    100
}

/// One file describes a trial setup plus whatever a subcommand needs on top.
/// Every field is optional; missing ones take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub setup: TrialSetup,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub grid: Vec<GridAxis>,
    #[serde(default)]
    pub recovery: RecoverySettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            setup: TrialSetup::default(),
            trials: default_trials(),
            master_seed: 0,
            grid: Vec::new(),
            recovery: RecoverySettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
