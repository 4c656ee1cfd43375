mod common;

use std::time::Instant;

use common::{peak_abs, rk4_error_ratio};
use motorfault::fault::{FaultKind, FaultScenario, Phase};
use motorfault::motor::{simulate, MotorParameters, SimulationSettings, TimeSeriesRun};
use motorfault::supply::SOURCE_RESISTANCE;

fn run(scenario: &FaultScenario, load: f64, seed: u64) -> TimeSeriesRun {
    simulate(
        &MotorParameters::default(),
        scenario,
        load,
        &SimulationSettings::default(),
        seed,
    )
    .unwrap()
}

#[test]
fn rated_load_settles_near_rated_speed() {
    let p = MotorParameters::default();
    let start = Instant::now();
    let r = run(&FaultScenario::healthy(), p.rated_torque, 1);
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(r.len(), 10_000);
    let rpm = MotorParameters::rad_s_to_rpm(r.summary().steady_speed);
    assert!((rpm - 1750.0).abs() <= 0.02 * 1750.0, "{rpm}");
}

#[test]
fn no_load_settles_near_synchronous_speed() {
    let r = run(&FaultScenario::healthy(), 0.0, 1);
    let sync = 4.0 * std::f64::consts::PI * 60.0 / 4.0;
    let w = r.summary().steady_speed;
    assert!((w - sync).abs() <= 0.01 * sync, "{w}");
}

#[test]
fn samples_are_spaced_at_the_output_rate() {
    let r = run(&FaultScenario::healthy(), 15.0, 3);
    for (k, s) in r.samples.iter().enumerate() {
        assert!((s.time - (k + 1) as f64 / 2000.0).abs() < 1e-9);
    }
}

#[test]
fn slip_identity_holds_on_every_sample() {
    let p = MotorParameters::default();
    let sync = p.synchronous_speed();
    let scenarios = [
        FaultScenario::healthy(),
        FaultScenario::open_circuit(vec![Phase::B], 1.0).unwrap(),
        FaultScenario::short_circuit(vec![], 1.0).unwrap(),
        FaultScenario::overload(1.8, 1.0).unwrap(),
        FaultScenario::broken_rotor_bar(FaultScenario::sideband_harmonics(0.03, 60.0, 0.2), 1.0)
            .unwrap(),
    ];
    for sc in &scenarios {
        for s in &run(sc, 18.0, 4).samples {
            let want = sync * (1.0 - s.rotor_frequency / 60.0);
            let scale = want.abs().max(1.0);
            assert!((s.rotor_speed - want).abs() <= 1e-9 * scale, "{}", sc.kind);
            assert!((0.0..=100.0).contains(&s.efficiency));
        }
    }
}

#[test]
fn steady_state_power_balance() {
    let p = MotorParameters::default();
    let r = run(&FaultScenario::healthy(), p.rated_torque, 5);
    // The last second is exactly 60 supply cycles.
    let tail = r.window(4.0, 5.0);
    let n = tail.len() as f64;
    let mean =
        |f: &dyn Fn(&motorfault::motor::MotorOutputs) -> f64| tail.iter().map(f).sum::<f64>() / n;
    let pin = mean(&|s| s.input_power);
    let rs = p.stator_resistance + SOURCE_RESISTANCE;
    let stator_cu = mean(&|s| rs * s.stator_currents.iter().map(|i| i * i).sum::<f64>());
    let rotor_cu = mean(&|s| {
        p.rotor_resistance_referred * s.rotor_currents.iter().map(|i| i * i).sum::<f64>()
    });
    let friction = mean(&|s| p.friction_coefficient * s.rotor_speed * s.rotor_speed);
    let shaft = mean(&|s| {
        (s.electromagnetic_torque - p.friction_coefficient * s.rotor_speed) * s.rotor_speed
    });
    let losses = stator_cu + rotor_cu + friction + shaft;
    assert!(
        ((pin - losses) / pin).abs() <= 0.02,
        "pin {pin} accounted {losses}"
    );
}

#[test]
fn starting_current_spike() {
    let p = MotorParameters::default();
    let r = run(&FaultScenario::healthy(), p.rated_torque, 6);
    let start = peak_abs(r.window(0.0, 0.5).iter().flat_map(|s| s.stator_currents));
    let steady = peak_abs(r.window(4.0, 5.0).iter().flat_map(|s| s.stator_currents));
    assert!(start >= 3.0 * steady, "{start} vs {steady}");
}

#[test]
fn rk4_error_shrinks_with_step() {
    let ratio = rk4_error_ratio(1e-4, 0.1);
    assert!(ratio >= 8.0, "{ratio}");
}

#[test]
fn runs_are_bit_identical_for_equal_inputs() {
    let sc = FaultScenario::overload(1.5, 0.8).unwrap();
    let a = run(&sc, 12.0, 9);
    let b = run(&sc, 12.0, 9);
    assert_eq!(a, b);
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_ne!(a, run(&sc, 12.0, 10));
}

#[test]
fn pre_onset_trajectory_matches_healthy() {
    let healthy = run(&FaultScenario::healthy(), 16.0, 7);
    let onset = 1.23;
    for kind in &FaultKind::ALL[1..] {
        let sc = match kind {
            FaultKind::OpenCircuit => FaultScenario::open_circuit(vec![Phase::A], onset),
            FaultKind::ShortCircuit => FaultScenario::short_circuit(vec![Phase::C], onset),
            FaultKind::Overload => FaultScenario::overload(1.6, onset),
            _ => FaultScenario::broken_rotor_bar(
                FaultScenario::sideband_harmonics(0.02, 60.0, 0.1),
                onset,
            ),
        }
        .unwrap();
        let faulted = run(&sc, 16.0, 7);
        let before = healthy
            .samples
            .iter()
            .take_while(|s| s.time < onset)
            .count();
        assert_eq!(
            &healthy.samples[..before],
            &faulted.samples[..before],
            "{kind}"
        );
        assert_ne!(
            healthy.samples[before + 50],
            faulted.samples[before + 50],
            "{kind}"
        );
    }
}

#[test]
fn run_csv_round_trips_at_print_precision() {
    let r = simulate(
        &MotorParameters::default(),
        &FaultScenario::healthy(),
        10.0,
        &SimulationSettings {
            duration: 0.5,
            ..Default::default()
        },
        2,
    )
    .unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let back = TimeSeriesRun::read_csv(&buf[..], &r.scenario_id).unwrap();
    assert_eq!(back.len(), r.len());
    for (a, b) in back.samples.iter().zip(&r.samples) {
        assert!((a.rotor_speed - b.rotor_speed).abs() <= 1e-5 * b.rotor_speed.abs().max(1e-3));
    }
}
