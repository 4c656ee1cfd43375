//! Fault scenarios and how each one reshapes the supply and the load seen by
//! the motor.
//!
//! * open circuit: the selected stator lines are opened by a breaker,
//! * short circuit: the selected terminals are shorted to the source neutral
//!   through a small fault resistance,
//! * overload: the shaft load steps above the rated torque,
//! * broken rotor bar: the supply carries additional sinusoids at the
//!   `(1 ± 2s)·f` sideband frequencies.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::motor::steady::steady_state;
use crate::motor::{MotorParameters, TerminalSupply};
use crate::supply::{positive_sequence, SOURCE_RESISTANCE};

/// Series resistance inserted in an opened line, ohms.
pub const OPEN_CIRCUIT_RESISTANCE: f64 = 1.0e6;
/// Resistance of the short-circuit fault path, ohms.
pub const FAULT_RESISTANCE: f64 = 1.0e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    Healthy,
    OpenCircuit,
    ShortCircuit,
    Overload,
    BrokenRotorBar,
}

impl FaultKind {
    pub const ALL: [FaultKind; 5] = [
        FaultKind::Healthy,
        FaultKind::OpenCircuit,
        FaultKind::ShortCircuit,
        FaultKind::Overload,
        FaultKind::BrokenRotorBar,
    ];

    pub fn label(self) -> FaultLabel {
        FaultLabel(match self {
            FaultKind::Healthy => 0,
            FaultKind::OpenCircuit => 1,
            FaultKind::ShortCircuit => 2,
            FaultKind::Overload => 3,
            FaultKind::BrokenRotorBar => 4,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FaultKind::Healthy => "healthy",
            FaultKind::OpenCircuit => "open_circuit",
            FaultKind::ShortCircuit => "short_circuit",
            FaultKind::Overload => "overload",
            FaultKind::BrokenRotorBar => "broken_rotor_bar",
        }
    }

    pub fn is_phase_fault(self) -> bool {
        matches!(self, FaultKind::OpenCircuit | FaultKind::ShortCircuit)
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Integer class label, 0 (healthy) through 4 (broken rotor bar).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FaultLabel(u8);

impl FaultLabel {
    pub const COUNT: usize = 5;

    pub fn new(value: u8) -> Option<Self> {
        (usize::from(value) < Self::COUNT).then_some(Self(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn kind(self) -> FaultKind {
        FaultKind::ALL[self.index()]
    }
}

impl TryFrom<u8> for FaultLabel {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        FaultLabel::new(value).ok_or_else(|| format!("fault label {value} outside 0..=4"))
    }
}

impl From<FaultLabel> for u8 {
    fn from(l: FaultLabel) -> u8 {
        l.0
    }
}

impl fmt::Display for FaultLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A fault, its parameters and its onset time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultScenario {
    pub kind: FaultKind,
    #[serde(default)]
    pub onset_time: f64,
    #[serde(default)]
    pub phases: Vec<Phase>,
    #[serde(default = "unit_factor")]
    pub overload_factor: f64,
    /// `(frequency Hz, amplitude as a fraction of the nominal peak)`.
    #[serde(default)]
    pub harmonics: Vec<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
}

fn unit_factor() -> f64 {
    1.0
}

impl FaultScenario {
    pub fn healthy() -> Self {
        Self {
            kind: FaultKind::Healthy,
            onset_time: 0.0,
            phases: Vec::new(),
            overload_factor: 1.0,
            harmonics: Vec::new(),
            seed: 0,
        }
    }

    pub fn open_circuit(phases: Vec<Phase>, onset_time: f64) -> Result<Self, ScenarioError> {
        Self {
            kind: FaultKind::OpenCircuit,
            onset_time,
            phases,
            ..Self::healthy()
        }
        .validated()
    }

    /// Short circuit; an empty phase list means all three phases.
    pub fn short_circuit(phases: Vec<Phase>, onset_time: f64) -> Result<Self, ScenarioError> {
        let phases = if phases.is_empty() {
            Phase::ALL.to_vec()
        } else {
            phases
        };
        Self {
            kind: FaultKind::ShortCircuit,
            onset_time,
            phases,
            ..Self::healthy()
        }
        .validated()
    }

    pub fn overload(factor: f64, onset_time: f64) -> Result<Self, ScenarioError> {
        Self {
            kind: FaultKind::Overload,
            onset_time,
            overload_factor: factor,
            ..Self::healthy()
        }
        .validated()
    }

    pub fn broken_rotor_bar(
        harmonics: Vec<(f64, f64)>,
        onset_time: f64,
    ) -> Result<Self, ScenarioError> {
        Self {
            kind: FaultKind::BrokenRotorBar,
            onset_time,
            harmonics,
            ..Self::healthy()
        }
        .validated()
    }

    /// Classic broken-bar sidebands `(1 ± 2s)·f`, each at `amplitude`.
    pub fn sideband_harmonics(slip: f64, frequency: f64, amplitude: f64) -> Vec<(f64, f64)> {
        vec![
            ((1.0 - 2.0 * slip) * frequency, amplitude),
            ((1.0 + 2.0 * slip) * frequency, amplitude),
        ]
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validated(self) -> Result<Self, ScenarioError> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if !(self.onset_time.is_finite() && self.onset_time >= 0.0) {
            return bad(format!("onset_time must be >= 0, got {}", self.onset_time));
        }
        match self.kind {
            FaultKind::OpenCircuit | FaultKind::ShortCircuit => {
                if self.phases.is_empty() {
                    return bad(format!("{} needs at least one phase", self.kind));
                }
                let mut seen = [false; 3];
                for p in &self.phases {
                    if std::mem::replace(&mut seen[p.index()], true) {
                        return bad(format!("phase {p:?} listed twice"));
                    }
                }
            }
            FaultKind::Overload => {
                if !(self.overload_factor.is_finite() && self.overload_factor > 1.0) {
                    return bad(format!(
                        "overload_factor must be > 1, got {}",
                        self.overload_factor
                    ));
                }
            }
            FaultKind::BrokenRotorBar => {
                if self.harmonics.is_empty() {
                    return bad("broken_rotor_bar needs at least one harmonic".into());
                }
                for &(f, a) in &self.harmonics {
                    if !(f.is_finite() && f > 0.0) {
                        return bad(format!("harmonic frequency must be > 0, got {f}"));
                    }
                    if !(a > 0.0 && a <= 0.5) {
                        return bad(format!("harmonic amplitude must be in (0, 0.5], got {a}"));
                    }
                }
            }
            FaultKind::Healthy => {}
        }
        Ok(())
    }

    /// Checks the onset lies inside a run of `duration` seconds.
    pub fn validate_for_duration(&self, duration: f64) -> Result<(), ScenarioError> {
        self.validate()?;
        if self.kind != FaultKind::Healthy && self.onset_time >= duration {
            return Err(ScenarioError::Invalid(format!(
                "onset_time {} is not inside the {duration} s run",
                self.onset_time
            )));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        format!("{}-{}", self.kind, self.seed)
    }

    pub fn label(&self) -> FaultLabel {
        label_of(self)
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.kind != FaultKind::Healthy && t >= self.onset_time
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: FaultScenario = serde_json::from_str(text)?;
        s.validated()
    }
}

pub fn label_of(scenario: &FaultScenario) -> FaultLabel {
    scenario.kind.label()
}

/// Supply presented to the motor terminals at time `t`.
pub fn effective_supply(
    scenario: &FaultScenario,
    t: f64,
    nominal_vabc: [f64; 3],
) -> TerminalSupply {
    supply_with_fault(scenario, scenario.is_active(t), t, nominal_vabc)
}

/// As [`effective_supply`] but with the fault state given explicitly, so a
/// caller can latch it per integration step.
pub fn supply_with_fault(
    scenario: &FaultScenario,
    active: bool,
    t: f64,
    nominal_vabc: [f64; 3],
) -> TerminalSupply {
    let mut supply = TerminalSupply::balanced(nominal_vabc, SOURCE_RESISTANCE);
    if !active {
        return supply;
    }
    match scenario.kind {
        FaultKind::Healthy | FaultKind::Overload => {}
        FaultKind::OpenCircuit => {
            for p in &scenario.phases {
                supply.series_resistance[p.index()] = OPEN_CIRCUIT_RESISTANCE;
            }
        }
        FaultKind::ShortCircuit => {
            let g = 1.0 / FAULT_RESISTANCE;
            for p in &scenario.phases {
                let k = p.index();
                let divider = 1.0 + SOURCE_RESISTANCE * g;
                supply.shunt_conductance[k] = g;
                supply.thevenin[k] = supply.source[k] / divider;
                supply.series_resistance[k] = SOURCE_RESISTANCE / divider;
            }
        }
        FaultKind::BrokenRotorBar => {
            let (alpha, beta) =
                crate::transforms::clarke(crate::transforms::Abc::from_array(nominal_vabc));
            let peak = alpha.hypot(beta);
            for &(f, a) in &scenario.harmonics {
                let h = positive_sequence(a * peak, f, t);
                for k in 0..3 {
                    supply.source[k] += h[k];
                }
            }
            supply.thevenin = supply.source;
        }
    }
    supply
}

/// Shaft load torque at time `t`.
pub fn effective_load(
    scenario: &FaultScenario,
    t: f64,
    nominal_load: f64,
    rated_torque: f64,
) -> f64 {
    if scenario.kind == FaultKind::Overload && scenario.is_active(t) {
        scenario.overload_factor * rated_torque
    } else {
        nominal_load
    }
}

/// A randomized scenario together with the background load it runs under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDraw {
    pub scenario: FaultScenario,
    pub load_torque: f64,
}

/// Draws a scenario of `kind` with randomized phase, severity, onset and
/// background load. Deterministic in `seed`.
pub fn randomized_scenario(kind: FaultKind, seed: u64, params: &MotorParameters) -> ScenarioDraw {
    let rated = params.rated_torque;
    randomized_scenario_in(kind, seed, params, (0.5 * rated, rated))
}

/// As [`randomized_scenario`], with the background load drawn from
/// `load_range` (N·m) instead of half to full rated torque.
pub fn randomized_scenario_in(
    kind: FaultKind,
    seed: u64,
    params: &MotorParameters,
    load_range: (f64, f64),
) -> ScenarioDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = load_range;
    let load_torque = lo + rng.gen_range(0.0..=1.0) * (hi - lo);
    let onset_time = rng.gen_range(0.5..=1.5);
    let scenario = match kind {
        FaultKind::Healthy => FaultScenario::healthy(),
        FaultKind::OpenCircuit => FaultScenario {
            kind,
            onset_time,
            phases: vec![Phase::ALL[rng.gen_range(0..3)]],
            ..FaultScenario::healthy()
        },
        FaultKind::ShortCircuit => {
            let phases = match rng.gen_range(0..4) {
                3 => Phase::ALL.to_vec(),
                k => vec![Phase::ALL[k]],
            };
            FaultScenario {
                kind,
                onset_time,
                phases,
                ..FaultScenario::healthy()
            }
        }
        FaultKind::Overload => FaultScenario {
            kind,
            onset_time,
            overload_factor: rng.gen_range(1.2..=2.0),
            ..FaultScenario::healthy()
        },
        FaultKind::BrokenRotorBar => {
            let slip = steady_state(params, SOURCE_RESISTANCE, load_torque)
                .map(|op| op.slip)
                .unwrap_or(0.03);
            let f = params.rated_frequency;
            let lower = rng.gen_range(0.05..=0.25);
            let upper = rng.gen_range(0.05..=0.25);
            FaultScenario {
                kind,
                onset_time,
                harmonics: vec![
                    ((1.0 - 2.0 * slip) * f, lower),
                    ((1.0 + 2.0 * slip) * f, upper),
                ],
                ..FaultScenario::healthy()
            }
        }
    };
    ScenarioDraw {
        scenario: scenario.with_seed(seed),
        load_torque,
    }
}
