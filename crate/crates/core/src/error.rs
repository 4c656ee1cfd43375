//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid motor parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),
    #[error("non-finite input to the motor model: {0}")]
    NonFiniteInput(String),
    #[error("state diverged at t = {time:.6} s (scenario {scenario})")]
    NonFiniteState { time: f64, scenario: String },
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid fault scenario: {0}")]
    Invalid(String),
    #[error("malformed scenario document: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("signal window is empty or shorter than two samples")]
    EmptyWindow,
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("run has {available} samples but {required} are required")]
    RunTooShort { available: usize, required: usize },
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line} has {found} fields, expected {expected}")]
    ArityMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid generation plan: {0}")]
    InvalidPlan(String),
    #[error("simulation failed for scenario {scenario}: {source}")]
    Simulation {
        scenario: String,
        #[source]
        source: SimulationError,
    },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error)]
pub enum MlError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("class {0} has no training records")]
    MissingClass(u8),
    #[error("record has {found} features, model expects {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model file does not match the schema: {0}")]
    Schema(String),
}
