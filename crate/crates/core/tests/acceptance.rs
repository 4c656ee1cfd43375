//! Acceptance run: one line per criterion, non-zero exit if any fails.
//! Runs the full 150,000-record dataset, so expect a few tens of seconds
//! with optimizations on.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{brute_force_split, peak_abs, rk4_error_ratio};
use motorfault::dataset::{generate, split, Dataset, GenerationPlan};
use motorfault::fault::{randomized_scenario, FaultKind, FaultLabel, FaultScenario, Phase};
use motorfault::ml::{
    best_split, compare_models, loss_and_gradient, train_model, ModelSpec, TreeParams,
};
use motorfault::motor::{simulate, MotorParameters, SimulationSettings, TimeSeriesRun};
use motorfault::spectrum::{fft_real, fft_real_padded, inverse_fft_real, SignalWindow};
use motorfault::transforms::{clarke_park, inverse_clarke_park, Abc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

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

fn csv_bytes(d: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    d.write_csv(&mut out).unwrap();
    out
}

fn counts(d: &Dataset) -> [usize; 5] {
    let mut c = [0; 5];
    for l in &d.labels {
        c[l.index()] += 1;
    }
    c
}

fn dataset_composition(full: &Dataset) -> Outcome {
    let full_counts = counts(full);
    let start = Instant::now();
    let desk = generate(
        &GenerationPlan::default().scaled(0.1),
        &MotorParameters::default(),
    )
    .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let desk_counts = counts(&desk);
    check(
        full.len() == 150_000
            && full_counts == [90_000, 15_000, 15_000, 15_000, 15_000]
            && desk.len() == 15_000
            && desk_counts == [9_000, 1_500, 1_500, 1_500, 1_500]
            && secs < 60.0,
        format!("full {full_counts:?}, desk {desk_counts:?} in {secs:.1} s"),
    )
}

fn run_shape() -> Outcome {
    let r = run(&FaultScenario::healthy(), 15.0, 2);
    let spacing = r
        .samples
        .windows(2)
        .all(|w| ((w[1].time - w[0].time) - 5e-4).abs() < 1e-9);
    check(
        r.len() == 10_000 && spacing,
        format!(
            "{} samples, {} s at {} Hz",
            r.len(),
            r.duration,
            r.sample_rate
        ),
    )
}

fn calibration() -> Outcome {
    let p = MotorParameters::default();
    let start = Instant::now();
    let rated = run(&FaultScenario::healthy(), p.rated_torque, 1);
    let secs = start.elapsed().as_secs_f64();
    let rpm = MotorParameters::rad_s_to_rpm(rated.summary().steady_speed);
    let idle = run(&FaultScenario::healthy(), 0.0, 1)
        .summary()
        .steady_speed;
    let sync = 2.0 * std::f64::consts::PI * 60.0 / 2.0;
    check(
        (rpm - 1750.0).abs() <= 0.02 * 1750.0 && (idle - sync).abs() <= 0.01 * sync && secs < 10.0,
        format!("rated {rpm:.1} RPM, no-load {idle:.3} rad/s, {secs:.2} s per run"),
    )
}

fn slip_identity() -> Outcome {
    let p = MotorParameters::default();
    let sync = p.synchronous_speed();
    let mut worst: f64 = 0.0;
    for kind in FaultKind::ALL {
        let d = randomized_scenario(kind, 3, &p);
        for s in &run(&d.scenario, d.load_torque, 3).samples {
            let want = sync * (1.0 - s.rotor_frequency / 60.0);
            worst = worst.max((s.rotor_speed - want).abs() / want.abs().max(1.0));
        }
    }
    let reference = sync * (1.0 - 1.11 / 60.0);
    check(
        worst <= 1e-9 && (reference * 100.0).round() == 18_501.0,
        format!("worst relative residual {worst:.1e}; 1.11 Hz -> {reference:.4} rad/s"),
    )
}

fn fault_signatures() -> Outcome {
    let p = MotorParameters::default();
    let load = 18.0;
    let healthy = run(&FaultScenario::healthy(), load, 11);

    let open = run(
        &FaultScenario::open_circuit(vec![Phase::A], 1.0).unwrap(),
        load,
        11,
    );
    let tail = open.window(4.0, 5.0);
    let open_mean =
        tail.iter().map(|s| s.stator_currents[0].abs()).sum::<f64>() / tail.len() as f64;

    let healthy_peak = peak_abs(
        healthy
            .window(4.0, 5.0)
            .iter()
            .flat_map(|s| s.stator_currents),
    );
    let short = run(
        &FaultScenario::short_circuit(vec![], 1.0).unwrap(),
        load,
        11,
    );
    let short_peak = peak_abs(
        short
            .window(1.0, 5.0)
            .iter()
            .flat_map(|s| s.stator_currents),
    );

    let h = healthy.summary();
    let o = run(&FaultScenario::overload(1.5, 1.0).unwrap(), load, 11).summary();

    let harmonics = FaultScenario::sideband_harmonics(0.0185, p.rated_frequency, 0.1);
    let brb = run(
        &FaultScenario::broken_rotor_bar(harmonics.clone(), 1.0).unwrap(),
        load,
        11,
    )
    .stator_current_a();
    let w = SignalWindow::new(brb[brb.len() - 1024..].to_vec(), 2000.0).unwrap();
    let spectrum = fft_real_padded(&w.hann(), 2048).unwrap();
    let floor = spectrum.median_magnitude();
    let sideband = harmonics
        .iter()
        .map(|(f, _)| spectrum.magnitude_at(*f))
        .fold(f64::INFINITY, f64::min);

    check(
        open_mean < 1e-3
            && short_peak >= 5.0 * healthy_peak
            && o.steady_speed < h.steady_speed
            && o.steady_torque > h.steady_torque
            && sideband >= 10.0 * floor,
        format!(
            "open {:.1e} A, short/healthy peak {:.1}x, overload {:.2}<{:.2} rad/s {:.2}>{:.2} N·m, sideband/floor {:.0}x",
            open_mean,
            short_peak / healthy_peak,
            o.steady_speed,
            h.steady_speed,
            o.steady_torque,
            h.steady_torque,
            sideband / floor
        ),
    )
}

fn fft_and_transforms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut parseval: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    let mut dominant = true;
    for n in [8usize, 100, 1000, 1024, 3000] {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let spectrum = fft_real(&SignalWindow::new(x.clone(), 2000.0).unwrap()).unwrap();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        parseval = parseval.max((spectrum.energy() - energy).abs() / energy);
        let back = inverse_fft_real(&spectrum).unwrap().samples;
        let peak = peak_abs(x.iter().copied());
        let err = (0..back.len())
            .map(|i| (back[i] - x.get(i).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max);
        round_trip = round_trip.max(err / peak);
    }
    for k in [1usize, 31, 60, 255, 511] {
        let n = 1024;
        let tone: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64 + 0.3).cos())
            .collect();
        let spectrum = fft_real(&SignalWindow::new(tone, 2000.0).unwrap()).unwrap();
        let top = (0..spectrum.magnitudes.len())
            .max_by(|&a, &b| spectrum.magnitudes[a].total_cmp(&spectrum.magnitudes[b]))
            .unwrap();
        dominant &= top == k;
    }
    let mut park: f64 = 0.0;
    for _ in 0..10_000 {
        let abc = Abc::new(
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
        );
        let theta = rng.gen_range(-20.0..20.0);
        let back = inverse_clarke_park(clarke_park(abc, theta), theta);
        for (a, b) in abc.to_array().iter().zip(back.to_array()) {
            park = park.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    check(
        parseval <= 1e-9 && round_trip <= 1e-9 && dominant && park <= 1e-12,
        format!(
            "Parseval {parseval:.1e}, FFT round trip {round_trip:.1e}, dominant bin {}, Clarke/Park {park:.1e}",
            if dominant { "exact" } else { "wrong" }
        ),
    )
}

fn classifier_quality(full: &Dataset) -> Outcome {
    let start = Instant::now();
    let parts = split(full, 0.7, 42).map_err(|e| e.to_string())?;
    let entries = compare_models(&parts.train, &parts.test, &ModelSpec::defaults())
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let tree = entries
        .iter()
        .find(|e| e.name == "decision_tree")
        .and_then(|e| e.report.as_ref())
        .ok_or("decision tree failed to train")?;
    let perfect: Vec<usize> = (1..5).filter(|&c| tree.recall[c] == 1.0).collect();
    let ranking: Vec<String> = entries
        .iter()
        .map(|e| format!("{} {:.4}", e.name, e.accuracy().unwrap_or(f64::NAN)))
        .collect();
    check(
        tree.accuracy >= 0.90
            && entries[0].name == "decision_tree"
            && !perfect.is_empty()
            && secs < 900.0,
        format!(
            "{}; recall 1.0 on classes {perfect:?}; {secs:.1} s",
            ranking.join(", ")
        ),
    )
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut split_mismatch = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=500);
        let d = rng.gen_range(1..=5);
        let grid = rng.gen_range(2..=60);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| rng.gen_range(0..grid) as f64 * 0.5 - 3.0)
                    .collect()
            })
            .collect();
        let y: Vec<FaultLabel> = (0..n)
            .map(|_| FaultLabel::new(rng.gen_range(0..5)).unwrap())
            .collect();
        let min_leaf = rng.gen_range(1..=5);
        let params = TreeParams {
            min_samples_leaf: min_leaf,
            min_gain: 0.0,
            ..TreeParams::default()
        };
        let features: Vec<usize> = (0..d).collect();
        let got = best_split(&x, &y, &features, &params).map(|s| (s.feature, s.threshold));
        let want = brute_force_split(&x, &y, min_leaf, 0.0).map(|(f, t, _)| (f, t));
        if got != want {
            split_mismatch += 1;
        }
    }

    let (n, d) = (40, 6);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let y: Vec<FaultLabel> = (0..n)
        .map(|_| FaultLabel::new(rng.gen_range(0..5)).unwrap())
        .collect();
    let mut w: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut b: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (_, gw, gb) = loss_and_gradient(&w, &b, &x, &y);
    let h = 1e-5;
    let mut grad_err: f64 = 0.0;
    for c in 0..5 {
        for j in 0..=d {
            let numeric = {
                let bump = |w: &mut Vec<Vec<f64>>, b: &mut Vec<f64>, delta: f64| {
                    if j < d {
                        w[c][j] += delta
                    } else {
                        b[c] += delta
                    }
                };
                bump(&mut w, &mut b, h);
                let up = loss_and_gradient(&w, &b, &x, &y).0;
                bump(&mut w, &mut b, -2.0 * h);
                let down = loss_and_gradient(&w, &b, &x, &y).0;
                bump(&mut w, &mut b, h);
                (up - down) / (2.0 * h)
            };
            let analytic = if j < d { gw[c][j] } else { gb[c] };
            grad_err = grad_err.max((numeric - analytic).abs());
        }
    }

    let ratio = rk4_error_ratio(1e-4, 0.1);
    check(
        split_mismatch == 0 && grad_err <= 1e-6 && ratio >= 8.0,
        format!("best_split mismatches {split_mismatch}/100, gradient error {grad_err:.1e}, RK4 ratio {ratio:.1}"),
    )
}

fn determinism() -> Outcome {
    let p = MotorParameters::default();
    let plan = GenerationPlan::default().scaled(0.02).with_seed(5);
    let a = generate(&plan, &p).map_err(|e| e.to_string())?;
    let b = generate(&plan, &p).map_err(|e| e.to_string())?;
    let data_same = csv_bytes(&a) == csv_bytes(&b);

    let sa = split(&a, 0.7, 9).map_err(|e| e.to_string())?;
    let sb = split(&b, 0.7, 9).map_err(|e| e.to_string())?;
    let split_same =
        csv_bytes(&sa.train) == csv_bytes(&sb.train) && csv_bytes(&sa.test) == csv_bytes(&sb.test);

    let models_same = ModelSpec::defaults().iter().all(|spec| {
        let ma = train_model(spec, &sa.train).unwrap().to_json();
        let mb = train_model(spec, &sb.train).unwrap().to_json();
        ma == mb
    });

    let sc =
        FaultScenario::broken_rotor_bar(FaultScenario::sideband_harmonics(0.02, 60.0, 0.1), 1.0)
            .unwrap();
    let run_bytes = || {
        let mut out = Vec::new();
        run(&sc, 16.0, 21).write_csv(&mut out).unwrap();
        out
    };
    let run_same = run_bytes() == run_bytes();

    check(
        data_same && split_same && models_same && run_same,
        format!("run {run_same}, dataset {data_same}, split {split_same}, models {models_same}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let full =
        generate(&GenerationPlan::default(), &MotorParameters::default()).expect("default dataset");
    let generated = start.elapsed().as_secs_f64();
    println!(
        "default dataset: {} records in {generated:.1} s",
        full.len()
    );

    let criteria: [(&str, &dyn Fn() -> Outcome); 9] = [
        ("dataset composition", &|| dataset_composition(&full)),
        ("run shape", &run_shape),
        ("calibration", &calibration),
        ("slip identity", &slip_identity),
        ("fault signatures", &fault_signatures),
        ("FFT and frame transforms", &fft_and_transforms),
        ("classifier quality", &|| classifier_quality(&full)),
        ("oracle equivalence", &oracles),
        ("determinism", &determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
