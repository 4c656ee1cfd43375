use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DatasetError, SimulationError};
use crate::fault::{supply_with_fault, FaultKind, FaultScenario};
use crate::fmt::sig6;
use crate::motor::model::{
    compute_outputs, phase_currents, project_onto_constraint, step_rk4, CurrentConstraint,
    CycleRms, MotorOutputs, MotorState, StatorCircuit,
};
use crate::motor::params::MotorParameters;
use crate::supply::nominal_voltages;

/// Speed scale of the load's breakaway characteristic, rad/s. Load torque
/// is `T·tanh(ω/ω0)`, so a stopped rotor is never driven backwards.
pub const LOAD_BREAKAWAY_SPEED: f64 = 1.0;

/// Header of the run CSV.
pub const RUN_CSV_HEADER: &str =
    "t,va,vb,vc,ias,ibs,ics,iar,ibr,icr,is_rms,ir_rms,pin,fr,wr,te,eff";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    /// Run length, s.
    pub duration: f64,
    /// Output sample rate, Hz.
    pub sample_rate: f64,
    /// Internal RK4 step, s.
    pub step: f64,
    /// Peak fractional load fluctuation drawn from the seed.
    pub load_ripple: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            duration: 5.0,
            sample_rate: 2000.0,
            step: 5.0e-5,
            load_ripple: 0.02,
        }
    }
}

impl SimulationSettings {
    pub fn sample_count(&self) -> usize {
        (self.sample_rate * self.duration).round() as usize
    }

    /// Internal steps per output sample.
    pub fn decimation(&self) -> Result<usize, SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidSettings(m));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be > 0, got {}", self.duration));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!("sample_rate must be > 0, got {}", self.sample_rate));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step must be > 0, got {}", self.step));
        }
        if !(0.0..1.0).contains(&self.load_ripple) {
            return bad(format!(
                "load_ripple must be in [0, 1), got {}",
                self.load_ripple
            ));
        }
        let ratio = 1.0 / (self.sample_rate * self.step);
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio {
            return bad(format!(
                "output period 1/{} s is not a whole number of {} s steps",
                self.sample_rate, self.step
            ));
        }
        if self.sample_count() == 0 {
            return bad("run produces no samples".into());
        }
        Ok(n as usize)
    }
}

/// Slow random fluctuation of the shaft load: three sinusoids between 0.5
/// and 5 Hz with seeded frequencies and phases.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadRipple {
    components: Vec<(f64, f64, f64)>,
}

impl LoadRipple {
    pub fn from_seed(seed: u64, peak_fraction: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components = (0..3)
            .map(|_| {
                let f = rng.gen_range(0.5..5.0);
                let phase = rng.gen_range(0.0..TAU);
                (peak_fraction / 3.0, f, phase)
            })
            .collect();
        Self { components }
    }

    /// Multiplier applied to the load torque at time `t`.
    pub fn factor(&self, t: f64) -> f64 {
        1.0 + self
            .components
            .iter()
            .map(|&(a, f, p)| a * (TAU * f * t + p).sin())
            .sum::<f64>()
    }
}

/// Sampled outputs of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRun {
    pub sample_rate: f64,
    pub duration: f64,
    pub scenario_id: String,
    pub samples: Vec<MotorOutputs>,
}

impl TimeSeriesRun {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Stator phase-a line current channel.
    pub fn stator_current_a(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.stator_currents[0]).collect()
    }

    pub fn stator_current(&self, phase: usize) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.stator_currents[phase])
            .collect()
    }

    /// Samples with `time` in `[from, to)`.
    pub fn window(&self, from: f64, to: f64) -> &[MotorOutputs] {
        let start = self.samples.partition_point(|s| s.time < from);
        let end = self.samples.partition_point(|s| s.time < to);
        &self.samples[start..end.max(start)]
    }

    pub fn summary(&self) -> RunSummary {
        let tail = self.window(self.duration - 1.0, f64::INFINITY);
        let tail = if tail.is_empty() {
            &self.samples[..]
        } else {
            tail
        };
        let n = tail.len().max(1) as f64;
        RunSummary {
            steady_speed: tail.iter().map(|s| s.rotor_speed).sum::<f64>() / n,
            peak_stator_current: self
                .samples
                .iter()
                .flat_map(|s| s.stator_currents)
                .fold(0.0, |m: f64, i| m.max(i.abs())),
            mean_input_power: tail.iter().map(|s| s.input_power).sum::<f64>() / n,
            steady_torque: tail.iter().map(|s| s.electromagnetic_torque).sum::<f64>() / n,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{RUN_CSV_HEADER}")?;
        let mut line = String::with_capacity(256);
        for s in &self.samples {
            line.clear();
            let fields = [
                s.time,
                s.voltages[0],
                s.voltages[1],
                s.voltages[2],
                s.stator_currents[0],
                s.stator_currents[1],
                s.stator_currents[2],
                s.rotor_currents[0],
                s.rotor_currents[1],
                s.rotor_currents[2],
                s.stator_current_rms,
                s.rotor_current_rms_referred,
                s.input_power,
                s.rotor_frequency,
                s.rotor_speed,
                s.electromagnetic_torque,
                s.efficiency,
            ];
            for (i, v) in fields.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&sig6(*v));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Reads a run CSV. The sample rate is recovered from the time column.
    pub fn read_csv<R: BufRead>(input: R, scenario_id: &str) -> Result<Self, DatasetError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or(DatasetError::Parse {
                line: 1,
                message: "missing header".into(),
            })?
            .map_err(|e| DatasetError::io("<run csv>", e))?;
        if header.trim_end() != RUN_CSV_HEADER {
            return Err(DatasetError::Parse {
                line: 1,
                message: format!("unexpected header {header:?}"),
            });
        }
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| DatasetError::io("<run csv>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| DatasetError::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if v.len() != 17 {
                return Err(DatasetError::ArityMismatch {
                    line: line_no,
                    expected: 17,
                    found: v.len(),
                });
            }
            samples.push(MotorOutputs {
                time: v[0],
                voltages: [v[1], v[2], v[3]],
                stator_currents: [v[4], v[5], v[6]],
                rotor_currents: [v[7], v[8], v[9]],
                stator_current_rms: v[10],
                rotor_current_rms_referred: v[11],
                input_power: v[12],
                rotor_frequency: v[13],
                rotor_speed: v[14],
                electromagnetic_torque: v[15],
                efficiency: v[16],
            });
        }
        if samples.len() < 2 {
            return Err(DatasetError::EmptyDataset);
        }
        let span = samples[samples.len() - 1].time - samples[0].time;
        let rate = (samples.len() - 1) as f64 / span;
        let sample_rate = if (rate - rate.round()).abs() < 1e-3 {
            rate.round()
        } else {
            rate
        };
        Ok(Self {
            sample_rate,
            duration: samples.len() as f64 / sample_rate,
            scenario_id: scenario_id.to_string(),
            samples,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Mean rotor speed over the final second, rad/s.
    pub steady_speed: f64,
    /// Largest absolute stator line current, A.
    pub peak_stator_current: f64,
    /// Mean input power over the final second, W.
    pub mean_input_power: f64,
    /// Mean electromagnetic torque over the final second, N·m.
    pub steady_torque: f64,
}

/// Integrates the motor from standstill under `scenario` and records every
/// metered quantity at `settings.sample_rate`.
///
/// `load_torque` is the background shaft load; an overload scenario
/// replaces it after onset. The fault state is latched per internal step on
/// the step grid, so everything before the first step at or after the onset
/// is bit-identical to the healthy run with the same load and seed.
pub fn simulate(
    params: &MotorParameters,
    scenario: &FaultScenario,
    load_torque: f64,
    settings: &SimulationSettings,
    seed: u64,
) -> Result<TimeSeriesRun, SimulationError> {
    params.validate()?;
    let decimation = settings.decimation()?;
    scenario
        .validate_for_duration(settings.duration)
        .map_err(|e| SimulationError::InvalidSettings(e.to_string()))?;
    if !load_torque.is_finite() {
        return Err(SimulationError::InvalidSettings(format!(
            "load torque must be finite, got {load_torque}"
        )));
    }

    let dt = settings.step;
    let count = settings.sample_count();
    let total_steps = count * decimation;
    let onset_step = if scenario.kind == FaultKind::Healthy {
        usize::MAX
    } else {
        (scenario.onset_time / dt - 1e-9).ceil().max(0.0) as usize
    };
    let ripple = LoadRipple::from_seed(seed, settings.load_ripple);
    let period = 1.0 / params.rated_frequency;
    let mut rms = CycleRms::new(period, dt);
    let diverged = |time: f64| SimulationError::NonFiniteState {
        time,
        scenario: scenario.id(),
    };

    let supply_at =
        |active: bool, t: f64| supply_with_fault(scenario, active, t, nominal_voltages(params, t));
    let load_at = |active: bool, t: f64, w: f64| {
        let base = if active && scenario.kind == FaultKind::Overload {
            scenario.overload_factor * params.rated_torque
        } else {
            load_torque
        };
        base * ripple.factor(t) * (w / LOAD_BREAKAWAY_SPEED).tanh()
    };

    let mut state = MotorState::at_rest();
    let mut samples = Vec::with_capacity(count);
    for m in 0..=total_steps {
        let t = m as f64 * dt;
        state.time = t;
        let active = m >= onset_step;
        let supply = supply_at(active, t);
        let circuit = StatorCircuit::from_supply(&supply, params);
        if m == onset_step && circuit.constraint != CurrentConstraint::Free {
            state = project_onto_constraint(&state, params, circuit.constraint);
        }
        if m > 0 {
            rms.push(&phase_currents(&state, params, &supply, circuit.constraint));
            if m % decimation == 0 {
                samples.push(compute_outputs(&state, params, &supply, &rms));
            }
        }
        if m == total_steps {
            break;
        }
        state = step_rk4(
            &state,
            params,
            |tau| StatorCircuit::from_supply(&supply_at(active, tau), params),
            |tau, w| load_at(active, tau, w),
            dt,
        )
        .map_err(|e| match e {
            SimulationError::NonFiniteState { time, .. } => diverged(time),
            other => other,
        })?;
    }

    Ok(TimeSeriesRun {
        sample_rate: settings.sample_rate,
        duration: settings.duration,
        scenario_id: scenario.id(),
        samples,
    })
}
