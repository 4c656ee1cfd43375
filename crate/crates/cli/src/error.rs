use std::fmt;

use motorfault::error::{DatasetError, MlError, ScenarioError, SignalError, SimulationError};

/// Exit status: 1 runtime failure (I/O, malformed data, training), 2 bad
/// configuration or arguments, 3 simulation divergence.
#[derive(Debug)]
pub enum CliError {
    Runtime(String),
    Config(String),
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Diverged(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Diverged(m) => write!(f, "simulation diverged: {m}"),
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::NonFiniteState { .. } => CliError::Diverged(e.to_string()),
            SimulationError::NonFiniteInput(_) => CliError::Diverged(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Simulation { scenario, source } => match CliError::from(source) {
                CliError::Diverged(m) => CliError::Diverged(format!("{scenario}: {m}")),
                other => other,
            },
            DatasetError::InvalidPlan(_) | DatasetError::Scenario(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<MlError> for CliError {
    fn from(e: MlError) -> Self {
        match e {
            MlError::InvalidHyperparameters(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}
