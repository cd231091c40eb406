use thiserror::Error;

use crate::readout::SignMode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate reservoir: unscaled spectral radius is zero (seed {seed})")]
    DegenerateReservoir { seed: u64 },

    #[error("spectral radius estimate unconverged after {iterations} iterations (seed {seed}, best estimate {estimate})")]
    UnconvergedSpectrum {
        seed: u64,
        iterations: usize,
        estimate: f64,
    },

    #[error("singular regression system under {mode:?} (condition estimate {condition:.3e})")]
    SingularSystem { mode: SignMode, condition: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty input sequence")]
    EmptyInput,

    #[error("variation model perturbs {requested} entries per step but the reservoir has only {available} nonzero entries")]
    TooManyPerturbed { requested: usize, available: usize },

    #[error("teacher is {actual:?}, operation requires {expected:?}")]
    TeacherMode {
        expected: crate::teacher::TeacherMode,
        actual: crate::teacher::TeacherMode,
    },

    #[error("at least one trial is required")]
    NoTrials,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
