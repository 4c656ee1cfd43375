//! Three-phase squirrel-cage induction motor: parameters, dynamics,
//! integration and the simulated measurement chain.

pub mod model;
pub mod params;
pub mod simulate;
pub mod steady;

pub use model::{
    compute_outputs, state_derivative, step_rk4, CycleRms, MotorOutputs, MotorState,
    StateDerivative, StatorCircuit, TerminalSupply,
};
pub use params::MotorParameters;
pub use simulate::{simulate, RunSummary, SimulationSettings, TimeSeriesRun};
