//! Flux-linkage d-q model of the induction machine in the stationary frame.
//!
//! State variables are the stator and referred rotor flux linkages on the
//! d (phase-a) and q axes, the mechanical rotor speed and angle. Currents
//! follow from the inductance relations
//!
//! ```text
//! ψs = Ls·is + Lm·ir        ψr = Lm·is + Lr·ir
//! ```
//!
//! and the machine equations are
//!
//! ```text
//! dψs/dt = vs − R·is
//! dψr/dt = −Rr·ir + ωe·J·ψr          (J = 90° rotation)
//! Te     = 3/2 · p · (ψs_d·is_q − ψs_q·is_d)
//! dω/dt  = (Te − TL − B·ω) / Jm
//! ```
//!
//! The motor neutral is isolated, so zero-sequence voltage has no effect.
//! Per-phase series resistance may differ between phases, and a phase whose
//! series resistance is at or above [`OPEN_PHASE_RESISTANCE`] is treated as
//! an ideal open switch: its current is constrained to zero rather than
//! integrated through a stiff resistor.

use std::f64::consts::TAU;

use crate::error::SimulationError;
use crate::motor::params::MotorParameters;
use crate::transforms::{inverse_clarke, phase_axis};

/// Series resistance at or above which a phase counts as open circuited.
pub const OPEN_PHASE_RESISTANCE: f64 = 1.0e3;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorState {
    pub stator_flux_d: f64,
    pub stator_flux_q: f64,
    pub rotor_flux_d: f64,
    pub rotor_flux_q: f64,
    /// Mechanical speed, rad/s.
    pub rotor_mech_speed: f64,
    /// Mechanical angle, wrapped to [0, 2π).
    pub rotor_mech_angle: f64,
    pub time: f64,
}

/// Time derivative of the integrated part of [`MotorState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub stator_flux_d: f64,
    pub stator_flux_q: f64,
    pub rotor_flux_d: f64,
    pub rotor_flux_q: f64,
    pub rotor_mech_speed: f64,
    pub rotor_mech_angle: f64,
}

impl MotorState {
    /// Standstill with zero flux.
    pub fn at_rest() -> Self {
        Self::default()
    }

    fn to_array(self) -> [f64; 6] {
        [
            self.stator_flux_d,
            self.stator_flux_q,
            self.rotor_flux_d,
            self.rotor_flux_q,
            self.rotor_mech_speed,
            self.rotor_mech_angle,
        ]
    }

    fn from_array(v: [f64; 6], time: f64) -> Self {
        Self {
            stator_flux_d: v[0],
            stator_flux_q: v[1],
            rotor_flux_d: v[2],
            rotor_flux_q: v[3],
            rotor_mech_speed: v[4],
            rotor_mech_angle: v[5],
            time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite()) && self.time.is_finite()
    }

    fn advanced(self, d: &StateDerivative, h: f64) -> Self {
        let x = self.to_array();
        let dx = d.to_array();
        let mut out = [0.0; 6];
        for i in 0..6 {
            out[i] = x[i] + h * dx[i];
        }
        Self::from_array(out, self.time + h)
    }
}

impl StateDerivative {
    fn to_array(self) -> [f64; 6] {
        [
            self.stator_flux_d,
            self.stator_flux_q,
            self.rotor_flux_d,
            self.rotor_flux_q,
            self.rotor_mech_speed,
            self.rotor_mech_angle,
        ]
    }
}

/// What the supply network presents to each motor terminal.
///
/// Each phase is a Thévenin source (`thevenin` behind `series_resistance`),
/// optionally with a fault shunt of `shunt_conductance` from the terminal to
/// the source neutral. `source` is the EMF at the metering point; line
/// currents are metered upstream of any terminal shunt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalSupply {
    pub source: [f64; 3],
    pub thevenin: [f64; 3],
    pub series_resistance: [f64; 3],
    pub shunt_conductance: [f64; 3],
}

impl TerminalSupply {
    /// Ideal source in series with `series_resistance` on every phase.
    pub fn balanced(vabc: [f64; 3], series_resistance: f64) -> Self {
        Self {
            source: vabc,
            thevenin: vabc,
            series_resistance: [series_resistance; 3],
            shunt_conductance: [0.0; 3],
        }
    }

    pub fn is_open(&self, phase: usize) -> bool {
        self.series_resistance[phase] >= OPEN_PHASE_RESISTANCE
    }
}

/// Constraint on the direction of the stator current vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurrentConstraint {
    Free,
    /// Current restricted to the given unit direction (one phase open).
    Along([f64; 2]),
    /// No stator current can flow (two or more phases open).
    Blocked,
}

/// Stator circuit in the stationary frame: driving voltage, resistance
/// matrix and current constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatorCircuit {
    pub voltage: [f64; 2],
    pub resistance: [[f64; 2]; 2],
    pub constraint: CurrentConstraint,
}

impl StatorCircuit {
    /// Symmetric circuit driven by a given stationary-frame voltage.
    pub fn balanced(v_dq: [f64; 2], resistance: f64) -> Self {
        Self {
            voltage: v_dq,
            resistance: [[resistance, 0.0], [0.0, resistance]],
            constraint: CurrentConstraint::Free,
        }
    }

    pub fn from_supply(supply: &TerminalSupply, params: &MotorParameters) -> Self {
        // Phase k contributes (2/3)·x_k·e_k in the stationary frame.
        let mut voltage = [0.0; 2];
        let mut resistance = [[0.0; 2]; 2];
        let mut open = Vec::with_capacity(3);
        for k in 0..3 {
            let (ex, ey) = phase_axis(k);
            if supply.is_open(k) {
                open.push(k);
                continue;
            }
            let v = 2.0 / 3.0 * supply.thevenin[k];
            voltage[0] += v * ex;
            voltage[1] += v * ey;
            // i_k = e_k · is for a zero-sequence-free current vector.
            let r = 2.0 / 3.0 * (params.stator_resistance + supply.series_resistance[k]);
            resistance[0][0] += r * ex * ex;
            resistance[0][1] += r * ex * ey;
            resistance[1][0] += r * ey * ex;
            resistance[1][1] += r * ey * ey;
        }
        let constraint = match open.as_slice() {
            [] => CurrentConstraint::Free,
            [k] => {
                let (ex, ey) = phase_axis(*k);
                CurrentConstraint::Along([-ey, ex])
            }
            _ => CurrentConstraint::Blocked,
        };
        Self {
            voltage,
            resistance,
            constraint,
        }
    }
}

/// Stator and rotor current vectors in the stationary frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqCurrents {
    pub stator: [f64; 2],
    pub rotor: [f64; 2],
}

pub fn dq_currents(
    state: &MotorState,
    params: &MotorParameters,
    constraint: CurrentConstraint,
) -> DqCurrents {
    let lm = params.magnetizing_inductance;
    let lr = params.rotor_self_inductance();
    let k = lm / lr;
    let lt = params.transient_inductance();
    let free = [
        (state.stator_flux_d - k * state.rotor_flux_d) / lt,
        (state.stator_flux_q - k * state.rotor_flux_q) / lt,
    ];
    let stator = match constraint {
        CurrentConstraint::Free => free,
        CurrentConstraint::Along(u) => {
            let along = free[0] * u[0] + free[1] * u[1];
            [along * u[0], along * u[1]]
        }
        CurrentConstraint::Blocked => [0.0, 0.0],
    };
    let rotor = [
        (state.rotor_flux_d - lm * stator[0]) / lr,
        (state.rotor_flux_q - lm * stator[1]) / lr,
    ];
    DqCurrents { stator, rotor }
}

/// Electromagnetic torque from stator flux and current.
pub fn electromagnetic_torque(
    state: &MotorState,
    params: &MotorParameters,
    stator_current: [f64; 2],
) -> f64 {
    1.5 * params.pole_pairs()
        * (state.stator_flux_d * stator_current[1] - state.stator_flux_q * stator_current[0])
}

/// Right-hand side of the machine equations.
pub fn state_derivative(
    state: &MotorState,
    params: &MotorParameters,
    circuit: &StatorCircuit,
    load_torque: f64,
) -> Result<StateDerivative, SimulationError> {
    if !state.is_finite() {
        return Err(SimulationError::NonFiniteInput(format!("state {state:?}")));
    }
    let inputs_finite = circuit.voltage.iter().all(|v| v.is_finite())
        && circuit.resistance.iter().flatten().all(|v| v.is_finite())
        && load_torque.is_finite();
    if !inputs_finite {
        return Err(SimulationError::NonFiniteInput(format!(
            "circuit {circuit:?}, load {load_torque}"
        )));
    }

    let cur = dq_currents(state, params, circuit.constraint);
    let rr = params.rotor_resistance_referred;
    let we = params.pole_pairs() * state.rotor_mech_speed;
    let d_rotor_d = -rr * cur.rotor[0] - we * state.rotor_flux_q;
    let d_rotor_q = -rr * cur.rotor[1] + we * state.rotor_flux_d;

    let r = &circuit.resistance;
    let free = [
        circuit.voltage[0] - (r[0][0] * cur.stator[0] + r[0][1] * cur.stator[1]),
        circuit.voltage[1] - (r[1][0] * cur.stator[0] + r[1][1] * cur.stator[1]),
    ];
    let k = params.magnetizing_inductance / params.rotor_self_inductance();
    let (d_stator_d, d_stator_q) = match circuit.constraint {
        CurrentConstraint::Free => (free[0], free[1]),
        CurrentConstraint::Along(u) => {
            // Along u the winding equation holds; across u the stator flux
            // tracks k·ψr so that the blocked current component stays zero.
            let along = free[0] * u[0] + free[1] * u[1];
            let e = [u[1], -u[0]];
            let across = k * (d_rotor_d * e[0] + d_rotor_q * e[1]);
            (along * u[0] + across * e[0], along * u[1] + across * e[1])
        }
        CurrentConstraint::Blocked => (k * d_rotor_d, k * d_rotor_q),
    };

    let te = electromagnetic_torque(state, params, cur.stator);
    let accel = (te - load_torque - params.friction_coefficient * state.rotor_mech_speed)
        / params.rotor_inertia;

    Ok(StateDerivative {
        stator_flux_d: d_stator_d,
        stator_flux_q: d_stator_q,
        rotor_flux_d: d_rotor_d,
        rotor_flux_q: d_rotor_q,
        rotor_mech_speed: accel,
        rotor_mech_angle: state.rotor_mech_speed,
    })
}

/// Moves the stator flux onto the manifold where the constrained current
/// components vanish. Needed once when a phase opens.
pub fn project_onto_constraint(
    state: &MotorState,
    params: &MotorParameters,
    constraint: CurrentConstraint,
) -> MotorState {
    let k = params.magnetizing_inductance / params.rotor_self_inductance();
    let mut out = *state;
    match constraint {
        CurrentConstraint::Free => {}
        CurrentConstraint::Along(u) => {
            let e = [u[1], -u[0]];
            let excess = (state.stator_flux_d - k * state.rotor_flux_d) * e[0]
                + (state.stator_flux_q - k * state.rotor_flux_q) * e[1];
            out.stator_flux_d -= excess * e[0];
            out.stator_flux_q -= excess * e[1];
        }
        CurrentConstraint::Blocked => {
            out.stator_flux_d = k * state.rotor_flux_d;
            out.stator_flux_q = k * state.rotor_flux_q;
        }
    }
    out
}

/// One classical fourth-order Runge-Kutta step of length `dt`.
///
/// `circuit_at(t)` gives the stator circuit at time `t`; `load_at(t, ω)`
/// the load torque at time `t` and mechanical speed `ω`.
pub fn step_rk4<C, L>(
    state: &MotorState,
    params: &MotorParameters,
    circuit_at: C,
    load_at: L,
    dt: f64,
) -> Result<MotorState, SimulationError>
where
    C: Fn(f64) -> StatorCircuit,
    L: Fn(f64, f64) -> f64,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimulationError::InvalidSettings(format!(
            "step size must be > 0, got {dt}"
        )));
    }
    let diverged = |time: f64| SimulationError::NonFiniteState {
        time,
        scenario: String::new(),
    };
    let eval = |s: &MotorState| {
        state_derivative(
            s,
            params,
            &circuit_at(s.time),
            load_at(s.time, s.rotor_mech_speed),
        )
        .map_err(|_| diverged(s.time))
    };

    let k1 = eval(state)?;
    let k2 = eval(&state.advanced(&k1, 0.5 * dt))?;
    let k3 = eval(&state.advanced(&k2, 0.5 * dt))?;
    let k4 = eval(&state.advanced(&k3, dt))?;

    let x = state.to_array();
    let (a, b, c, d) = (k1.to_array(), k2.to_array(), k3.to_array(), k4.to_array());
    let mut next = [0.0; 6];
    for i in 0..6 {
        next[i] = x[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
    }
    let mut angle = next[5].rem_euclid(TAU);
    if angle >= TAU {
        angle = 0.0;
    }
    next[5] = angle;
    let out = MotorState::from_array(next, state.time + dt);
    if !out.is_finite() {
        return Err(diverged(out.time));
    }
    Ok(out)
}

/// Metered phase currents: three stator line currents then three referred
/// rotor phase currents.
pub fn phase_currents(
    state: &MotorState,
    params: &MotorParameters,
    supply: &TerminalSupply,
    constraint: CurrentConstraint,
) -> [f64; 6] {
    let cur = dq_currents(state, params, constraint);
    let stator = inverse_clarke(cur.stator[0], cur.stator[1]).to_array();
    let rotor = inverse_clarke(cur.rotor[0], cur.rotor[1]).to_array();
    let mut out = [0.0; 6];
    for k in 0..3 {
        let winding = if supply.is_open(k) { 0.0 } else { stator[k] };
        let terminal =
            supply.thevenin[k] - supply.series_resistance[k].min(OPEN_PHASE_RESISTANCE) * winding;
        out[k] = winding + supply.shunt_conductance[k] * terminal;
        out[3 + k] = rotor[k];
    }
    out
}

/// One recorded sample of every metered quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorOutputs {
    pub time: f64,
    /// Source phase voltages at the metering point.
    pub voltages: [f64; 3],
    /// Stator line currents a, b, c.
    pub stator_currents: [f64; 3],
    /// Referred rotor phase currents a, b, c.
    pub rotor_currents: [f64; 3],
    /// Mean of the three stator line-current RMS values over one supply cycle.
    pub stator_current_rms: f64,
    /// Mean of the three rotor phase-current RMS values over one supply cycle.
    pub rotor_current_rms_referred: f64,
    /// Instantaneous three-phase input power, W.
    pub input_power: f64,
    /// Slip frequency of rotor currents, Hz.
    pub rotor_frequency: f64,
    /// Mechanical rotor speed, rad/s.
    pub rotor_speed: f64,
    pub electromagnetic_torque: f64,
    /// Shaft efficiency in percent, clamped to [0, 100].
    pub efficiency: f64,
}

/// Sliding one-cycle RMS over the six metered current channels.
#[derive(Debug, Clone)]
pub struct CycleRms {
    squares: Vec<[f64; 6]>,
    sums: [f64; 6],
    next: usize,
    filled: usize,
}

impl CycleRms {
    /// Window of `round(period / dt)` samples.
    pub fn new(period: f64, dt: f64) -> Self {
        let len = ((period / dt).round() as usize).max(1);
        Self {
            squares: vec![[0.0; 6]; len],
            sums: [0.0; 6],
            next: 0,
            filled: 0,
        }
    }

    pub fn push(&mut self, currents: &[f64; 6]) {
        let old = self.squares[self.next];
        let mut sq = [0.0; 6];
        for i in 0..6 {
            sq[i] = currents[i] * currents[i];
        }
        self.squares[self.next] = sq;
        self.next = (self.next + 1) % self.squares.len();
        if self.filled < self.squares.len() {
            self.filled += 1;
            for i in 0..6 {
                self.sums[i] += sq[i];
            }
        } else {
            // Recompute once per window to stop drift of the running sum.
            if self.next == 0 {
                self.sums = [0.0; 6];
                for s in &self.squares {
                    for i in 0..6 {
                        self.sums[i] += s[i];
                    }
                }
            } else {
                for i in 0..6 {
                    self.sums[i] += sq[i] - old[i];
                }
            }
        }
    }

    pub fn rms(&self) -> [f64; 6] {
        let n = self.filled.max(1) as f64;
        self.sums.map(|s| (s.max(0.0) / n).sqrt())
    }
}

/// Assembles a [`MotorOutputs`] sample from the state, the supply seen at
/// that instant and the window of recent currents.
pub fn compute_outputs(
    state: &MotorState,
    params: &MotorParameters,
    supply: &TerminalSupply,
    rms: &CycleRms,
) -> MotorOutputs {
    let constraint = StatorCircuit::from_supply(supply, params).constraint;
    let currents = phase_currents(state, params, supply, constraint);
    let cur = dq_currents(state, params, constraint);
    let te = electromagnetic_torque(state, params, cur.stator);

    let input_power: f64 = (0..3).map(|k| supply.source[k] * currents[k]).sum();

    let w_sync_e = params.supply_angular_frequency();
    let slip = (w_sync_e - params.pole_pairs() * state.rotor_mech_speed) / w_sync_e;
    let rotor_frequency = slip * params.rated_frequency;
    let rotor_speed = rotor_speed_from_frequency(params, rotor_frequency);

    let w = state.rotor_mech_speed;
    let efficiency = if input_power < 1.0 {
        0.0
    } else {
        let shaft = (te - params.friction_coefficient * w).max(0.0) * w;
        (100.0 * shaft / input_power).clamp(0.0, 100.0)
    };

    let r = rms.rms();
    MotorOutputs {
        time: state.time,
        voltages: supply.source,
        stator_currents: [currents[0], currents[1], currents[2]],
        rotor_currents: [currents[3], currents[4], currents[5]],
        stator_current_rms: (r[0] + r[1] + r[2]) / 3.0,
        rotor_current_rms_referred: (r[3] + r[4] + r[5]) / 3.0,
        input_power,
        rotor_frequency,
        rotor_speed,
        electromagnetic_torque: te,
        efficiency,
    }
}

/// Mechanical speed implied by a rotor slip frequency.
pub fn rotor_speed_from_frequency(params: &MotorParameters, rotor_frequency: f64) -> f64 {
    params.synchronous_speed() * (1.0 - rotor_frequency / params.rated_frequency)
}
