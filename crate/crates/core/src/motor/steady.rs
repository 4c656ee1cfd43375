//! Per-phase equivalent-circuit steady state, used for calibration checks
//! and to place broken-rotor-bar sidebands before a run starts.

use num_complex::Complex64;

use crate::error::SimulationError;
use crate::motor::params::MotorParameters;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub slip: f64,
    /// Mechanical speed, rad/s.
    pub speed: f64,
    pub torque: f64,
    pub stator_current_rms: f64,
    pub rotor_current_rms: f64,
    pub input_power: f64,
}

/// Circuit solution at a given slip with `series_resistance` added to the
/// stator branch.
pub fn operating_point(
    params: &MotorParameters,
    series_resistance: f64,
    slip: f64,
) -> OperatingPoint {
    let w = params.supply_angular_frequency();
    let v = Complex64::new(params.peak_phase_voltage() / 2.0_f64.sqrt(), 0.0);
    let zs = Complex64::new(
        params.stator_resistance + series_resistance,
        w * params.stator_leakage_inductance,
    );
    let zm = Complex64::new(0.0, w * params.magnetizing_inductance);
    let zr = Complex64::new(
        params.rotor_resistance_referred / slip,
        w * params.rotor_leakage_inductance_referred,
    );
    let z = zs + zm * zr / (zm + zr);
    let is = v / z;
    let ir = is * zm / (zm + zr);
    let air_gap = 3.0 * ir.norm_sqr() * params.rotor_resistance_referred / slip;
    OperatingPoint {
        slip,
        speed: params.synchronous_speed() * (1.0 - slip),
        torque: air_gap / params.synchronous_speed(),
        stator_current_rms: is.norm(),
        rotor_current_rms: ir.norm(),
        input_power: 3.0 * (v * is.conj()).re,
    }
}

/// Slip of maximum torque.
pub fn breakdown_slip(params: &MotorParameters, series_resistance: f64) -> f64 {
    let (mut lo, mut hi) = (1e-6, 1.0);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let t = |s| operating_point(params, series_resistance, s).torque;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if t(a) > t(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// Stable operating point where motor torque balances `load_torque` plus
/// viscous friction.
pub fn steady_state(
    params: &MotorParameters,
    series_resistance: f64,
    load_torque: f64,
) -> Result<OperatingPoint, SimulationError> {
    let residual = |s: f64| {
        let op = operating_point(params, series_resistance, s);
        op.torque - load_torque - params.friction_coefficient * op.speed
    };
    let (mut lo, mut hi) = (1e-12, breakdown_slip(params, series_resistance));
    if residual(hi) < 0.0 {
        return Err(SimulationError::InvalidSettings(format!(
            "load torque {load_torque} N·m exceeds breakdown torque"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(operating_point(params, series_resistance, 0.5 * (lo + hi)))
}
