//! Nominal three-phase supply.

use std::f64::consts::{PI, TAU};

use crate::motor::MotorParameters;

/// Resistance of the supply source per phase, ohms.
pub const SOURCE_RESISTANCE: f64 = 0.05;

/// Positive-sequence sinusoid set of peak `amplitude` at `frequency` Hz.
pub fn positive_sequence(amplitude: f64, frequency: f64, t: f64) -> [f64; 3] {
    let theta = TAU * frequency * t;
    [
        amplitude * theta.sin(),
        amplitude * (theta - 2.0 * PI / 3.0).sin(),
        amplitude * (theta + 2.0 * PI / 3.0).sin(),
    ]
}

/// Rated phase-to-neutral voltages at time `t`.
pub fn nominal_voltages(params: &MotorParameters, t: f64) -> [f64; 3] {
    positive_sequence(params.peak_phase_voltage(), params.rated_frequency, t)
}
