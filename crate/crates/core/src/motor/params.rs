use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::SimulationError;

/// Electrical and mechanical constants of a squirrel-cage induction motor,
/// plus its nameplate ratings.
///
/// Rotor quantities are referred to the stator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorParameters {
    pub stator_resistance: f64,
    pub rotor_resistance_referred: f64,
    pub stator_leakage_inductance: f64,
    pub rotor_leakage_inductance_referred: f64,
    pub magnetizing_inductance: f64,
    pub rotor_inertia: f64,
    pub friction_coefficient: f64,
    pub pole_count: u32,
    pub rated_line_voltage: f64,
    pub rated_frequency: f64,
    pub rated_torque: f64,
    pub rated_speed: f64,
    pub rated_current: f64,
}

impl Default for MotorParameters {
    fn default() -> Self {
        Self::five_hp_220v()
    }
}

impl MotorParameters {
    /// 5 hp, 220 V, 60 Hz, 4-pole machine rated 22.2 N·m at 1750 RPM.
    ///
    /// Circuit constants were chosen so that, together with the 0.05 Ω
    /// source resistance of the supply, rated torque settles at 1750 RPM
    /// and breakdown torque is about three times rated.
    pub fn five_hp_220v() -> Self {
        Self {
            stator_resistance: 0.25,
            rotor_resistance_referred: 0.28,
            stator_leakage_inductance: 2.0e-3,
            rotor_leakage_inductance_referred: 2.0e-3,
            magnetizing_inductance: 69.31e-3,
            rotor_inertia: 0.05,
            friction_coefficient: 0.005,
            pole_count: 4,
            rated_line_voltage: 220.0,
            rated_frequency: 60.0,
            rated_torque: 22.2,
            rated_speed: 1750.0,
            rated_current: 5.99,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let positive = [
            ("stator_resistance", self.stator_resistance),
            ("rotor_resistance_referred", self.rotor_resistance_referred),
            ("stator_leakage_inductance", self.stator_leakage_inductance),
            (
                "rotor_leakage_inductance_referred",
                self.rotor_leakage_inductance_referred,
            ),
            ("magnetizing_inductance", self.magnetizing_inductance),
            ("rotor_inertia", self.rotor_inertia),
            ("rated_line_voltage", self.rated_line_voltage),
            ("rated_frequency", self.rated_frequency),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(SimulationError::InvalidParameters(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if !(self.friction_coefficient.is_finite() && self.friction_coefficient >= 0.0) {
            return Err(SimulationError::InvalidParameters(
                "friction_coefficient must be finite and >= 0".into(),
            ));
        }
        if self.pole_count < 2 || self.pole_count % 2 != 0 {
            return Err(SimulationError::InvalidParameters(format!(
                "pole_count must be even and >= 2, got {}",
                self.pole_count
            )));
        }
        if self.synchronous_speed_rpm() <= self.rated_speed {
            return Err(SimulationError::InvalidParameters(format!(
                "synchronous speed {} RPM must exceed rated speed {} RPM",
                self.synchronous_speed_rpm(),
                self.rated_speed
            )));
        }
        Ok(())
    }

    pub fn pole_pairs(&self) -> f64 {
        f64::from(self.pole_count / 2)
    }

    pub fn synchronous_speed_rpm(&self) -> f64 {
        120.0 * self.rated_frequency / f64::from(self.pole_count)
    }

    /// Supply angular frequency, electrical rad/s.
    pub fn supply_angular_frequency(&self) -> f64 {
        2.0 * PI * self.rated_frequency
    }

    /// Synchronous mechanical speed, rad/s.
    pub fn synchronous_speed(&self) -> f64 {
        self.supply_angular_frequency() / self.pole_pairs()
    }

    pub fn stator_self_inductance(&self) -> f64 {
        self.stator_leakage_inductance + self.magnetizing_inductance
    }

    pub fn rotor_self_inductance(&self) -> f64 {
        self.rotor_leakage_inductance_referred + self.magnetizing_inductance
    }

    /// Stator transient inductance `Ls - Lm²/Lr`.
    pub fn transient_inductance(&self) -> f64 {
        let lm = self.magnetizing_inductance;
        self.stator_self_inductance() - lm * lm / self.rotor_self_inductance()
    }

    /// Peak phase-to-neutral voltage of the rated supply.
    pub fn peak_phase_voltage(&self) -> f64 {
        self.rated_line_voltage * (2.0_f64 / 3.0).sqrt()
    }

    pub fn rpm_to_rad_s(rpm: f64) -> f64 {
        rpm * 2.0 * PI / 60.0
    }

    pub fn rad_s_to_rpm(w: f64) -> f64 {
        w * 60.0 / (2.0 * PI)
    }
}
