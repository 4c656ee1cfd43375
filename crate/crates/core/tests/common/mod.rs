#![allow(dead_code)]

use motorfault::fault::FaultLabel;
use motorfault::motor::{step_rk4, MotorParameters, MotorState, StatorCircuit, TerminalSupply};
use motorfault::supply::{nominal_voltages, SOURCE_RESISTANCE};

/// Brute-force best Gini split: enumerate every (feature, midpoint), build
/// each partition by filtering, and rank exactly by
/// `gain·n²·nl·nr = n·(Σ cl²·nr + Σ cr²·nl) − P·nl·nr` with `P = Σ c²`.
/// Returns `(feature, threshold, gain)`.
pub fn brute_force_split(
    x: &[Vec<f64>],
    y: &[FaultLabel],
    min_leaf: usize,
    min_gain: f64,
) -> Option<(usize, f64, f64)> {
    let n = y.len();
    let counts = |idx: &mut dyn Iterator<Item = usize>| {
        let mut c = [0i128; 5];
        for i in idx {
            c[y[i].index()] += 1;
        }
        c
    };
    let parent = counts(&mut (0..n));
    let p_sq: i128 = parent.iter().map(|c| c * c).sum();
    // (numerator, denominator) of the gain, both exact.
    let mut best: Option<(i128, i128, usize, f64)> = None;
    for f in 0..x[0].len() {
        let mut values: Vec<f64> = x.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let mut t = (w[0] + w[1]) / 2.0;
            if t >= w[1] {
                t = w[0];
            }
            let left = counts(&mut (0..n).filter(|&i| x[i][f] <= t));
            let nl: i128 = left.iter().sum();
            let nr = n as i128 - nl;
            if (nl as usize) < min_leaf || (nr as usize) < min_leaf {
                continue;
            }
            let sl: i128 = left.iter().map(|c| c * c).sum();
            let sr: i128 = parent
                .iter()
                .zip(&left)
                .map(|(p, l)| (p - l) * (p - l))
                .sum();
            let nn = n as i128;
            let num = nn * (sl * nr + sr * nl) - p_sq * nl * nr;
            let den = nn * nn * nl * nr;
            let better = match &best {
                None => true,
                Some((bn, bd, bf, bt)) => {
                    let lhs = num * bd;
                    let rhs = bn * den;
                    lhs > rhs || (lhs == rhs && (f, t) < (*bf, *bt))
                }
            };
            if better {
                best = Some((num, den, f, t));
            }
        }
    }
    let (num, den, f, t) = best?;
    let gain = num as f64 / den as f64;
    (gain >= min_gain).then_some((f, t, gain))
}

/// State after integrating the healthy motor from rest for `duration`
/// seconds at fixed step `dt`, rated supply, smooth load.
pub fn rk4_endpoint(dt: f64, duration: f64) -> MotorState {
    let p = MotorParameters::default();
    let circuit = |t: f64| {
        StatorCircuit::from_supply(
            &TerminalSupply::balanced(nominal_voltages(&p, t), SOURCE_RESISTANCE),
            &p,
        )
    };
    let load = |_t: f64, w: f64| p.rated_torque * w.tanh();
    let steps = (duration / dt).round() as usize;
    let mut s = MotorState::at_rest();
    for m in 0..steps {
        s.time = m as f64 * dt;
        s = step_rk4(&s, &p, circuit, load, dt).unwrap();
    }
    s
}

pub fn state_distance(a: &MotorState, b: &MotorState) -> f64 {
    [
        a.stator_flux_d - b.stator_flux_d,
        a.stator_flux_q - b.stator_flux_q,
        a.rotor_flux_d - b.rotor_flux_d,
        a.rotor_flux_q - b.rotor_flux_q,
        a.rotor_mech_speed - b.rotor_mech_speed,
    ]
    .iter()
    .map(|d| d * d)
    .sum::<f64>()
    .sqrt()
}

/// Error reduction when halving the step: `|x(dt) − x(dt/2)| / |x(dt/2) − x(dt/4)|`.
pub fn rk4_error_ratio(dt: f64, duration: f64) -> f64 {
    let a = rk4_endpoint(dt, duration);
    let b = rk4_endpoint(dt / 2.0, duration);
    let c = rk4_endpoint(dt / 4.0, duration);
    state_distance(&a, &b) / state_distance(&b, &c)
}

pub fn peak_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}
