use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use motorfault::dataset::{
    export_csv, generate, import_csv, sample_per_class, split, Dataset, GenerationPlan,
};
use motorfault::fault::{FaultKind, FaultScenario, Phase};
use motorfault::features::{featurize_range, FeatureConfig, FEATURE_NAMES};
use motorfault::fmt::sig6;
use motorfault::ml::{
    compare_models, deserialize_model, evaluate, ranking_table, serialize_model, train_model,
    ModelSpec,
};
use motorfault::motor::steady::steady_state;
use motorfault::motor::{simulate, MotorParameters, SimulationSettings, TimeSeriesRun};
use motorfault::spectrum::{fft_real_padded, SignalWindow};
use motorfault::supply::SOURCE_RESISTANCE;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ConfigFile;
use crate::error::{io_error, CliError};
use crate::{
    Cli, Command, CompareArgs, EvaluateArgs, FaultArg, FeaturizeArgs, GenerateArgs, HyperArgs,
    PairsArgs, PhaseArg, SimulateArgs, SpectraArgs, SplitArgs, TrainArgs, DEFAULT_SEED,
};

const DEFAULT_ONSET: f64 = 1.0;
const DEFAULT_OVERLOAD: f64 = 1.5;
const DEFAULT_HARMONIC_AMPLITUDE: f64 = 0.1;
const DEFAULT_RATIO: f64 = 0.7;
const DEFAULT_PAIRS_PER_CLASS: usize = 2000;
/// The spectra window ends this long after the fault onset, s.
const SPECTRA_LAG: f64 = 0.25;

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: &'a ConfigFile,
    seed: u64,
}

impl Ctx<'_> {
    fn out(&self, default: &str) -> PathBuf {
        self.cli
            .out
            .clone()
            .or_else(|| self.cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from(default))
    }

    fn seed_given(&self) -> bool {
        self.cli.seed.is_some() || self.cfg.seed.is_some()
    }
}

pub fn run(cli: &Cli, cfg: &ConfigFile) -> Result<(), CliError> {
    let ctx = Ctx {
        cli,
        cfg,
        seed: cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
    };
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Generate(a) => cmd_generate(&ctx, a),
        Command::Split(a) => cmd_split(&ctx, a),
        Command::Featurize(a) => cmd_featurize(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Evaluate(a) => cmd_evaluate(&ctx, a),
        Command::Compare(a) => cmd_compare(&ctx, a),
        Command::ExportSpectra(a) => cmd_export_spectra(&ctx, a),
        Command::ExportPairs(a) => cmd_export_pairs(&ctx, a),
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    version: &'a str,
    args: Vec<String>,
    seed: u64,
    inputs: Vec<String>,
    outputs: Vec<String>,
    parameters: Value,
}

fn sidecar_path(artifact: &Path) -> PathBuf {
    if artifact.is_dir() {
        return artifact.join("provenance.json");
    }
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".provenance.json");
    artifact.with_file_name(name)
}

fn write_sidecar(
    ctx: &Ctx,
    command: &str,
    artifact: &Path,
    inputs: &[&Path],
    outputs: &[&Path],
    parameters: Value,
) -> Result<(), CliError> {
    let s = Sidecar {
        command,
        version: env!("CARGO_PKG_VERSION"),
        args: std::env::args().skip(1).collect(),
        seed: ctx.seed,
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        parameters,
    };
    let mut text = serde_json::to_string_pretty(&s).expect("sidecar serializes");
    text.push('\n');
    write_text(&sidecar_path(artifact), &text)
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
        }
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    ensure_parent(path)?;
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    import_csv(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn phase_of(p: PhaseArg) -> Phase {
    match p {
        PhaseArg::A => Phase::A,
        PhaseArg::B => Phase::B,
        PhaseArg::C => Phase::C,
    }
}

fn settings(duration: Option<f64>, sample_rate: Option<f64>) -> SimulationSettings {
    let d = SimulationSettings::default();
    SimulationSettings {
        duration: duration.unwrap_or(d.duration),
        sample_rate: sample_rate.unwrap_or(d.sample_rate),
        ..d
    }
}

/// Broken-bar sidebands at the steady-state slip for `load`.
fn brb_harmonics(
    params: &MotorParameters,
    load: f64,
    amplitude: f64,
) -> Result<Vec<(f64, f64)>, CliError> {
    let slip = steady_state(params, SOURCE_RESISTANCE, load)
        .map_err(|e| CliError::Config(format!("load {load} N·m: {e}")))?
        .slip;
    Ok(FaultScenario::sideband_harmonics(
        slip,
        params.rated_frequency,
        amplitude,
    ))
}

fn shortcut_scenario(
    params: &MotorParameters,
    fault: FaultArg,
    phases: Vec<Phase>,
    load: f64,
    onset: f64,
    factor: f64,
    amplitude: f64,
) -> Result<FaultScenario, CliError> {
    Ok(match fault {
        FaultArg::Healthy => FaultScenario::healthy(),
        FaultArg::Open => {
            let phases = if phases.is_empty() {
                vec![Phase::A]
            } else {
                phases
            };
            FaultScenario::open_circuit(phases, onset)?
        }
        FaultArg::Short => FaultScenario::short_circuit(phases, onset)?,
        FaultArg::Overload => FaultScenario::overload(factor, onset)?,
        FaultArg::Brb => {
            FaultScenario::broken_rotor_bar(brb_harmonics(params, load, amplitude)?, onset)?
        }
    })
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<(), CliError> {
    let params = MotorParameters::default();
    let cfg = ctx.cfg;
    let load = a.load.or(cfg.load).unwrap_or(params.rated_torque);
    if !load.is_finite() || load < 0.0 {
        return Err(CliError::Config(format!(
            "load must be a non-negative number, got {load}"
        )));
    }
    let settings = settings(
        a.duration.or(cfg.duration),
        a.sample_rate.or(cfg.sample_rate),
    );
    let mut inputs: Vec<&Path> = Vec::new();
    let scenario = match &a.scenario {
        Some(path) => {
            inputs.push(path);
            let s = FaultScenario::from_json(&read_text(path)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if ctx.seed_given() {
                s.with_seed(ctx.seed)
            } else {
                s
            }
        }
        None => shortcut_scenario(
            &params,
            a.fault,
            a.phase.iter().copied().map(phase_of).collect(),
            load,
            a.onset.or(cfg.onset).unwrap_or(DEFAULT_ONSET),
            a.overload_factor
                .or(cfg.overload_factor)
                .unwrap_or(DEFAULT_OVERLOAD),
            a.harmonic_amplitude
                .or(cfg.harmonic_amplitude)
                .unwrap_or(DEFAULT_HARMONIC_AMPLITUDE),
        )?
        .with_seed(ctx.seed),
    };
    let run = simulate(&params, &scenario, load, &settings, scenario.seed)?;

    let out = ctx.out("run.csv");
    let mut w = create(&out)?;
    run.write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_error(&out, e))?;
    let scenario_path = out.with_extension("scenario.json");
    let scenario_json = scenario.to_json();
    write_text(&scenario_path, &format!("{scenario_json}\n"))?;
    write_sidecar(
        ctx,
        "simulate",
        &out,
        &inputs,
        &[&out, &scenario_path],
        json!({ "scenario": scenario, "load_torque": load, "settings": settings, "motor": params }),
    )?;

    let s = run.summary();
    println!("{scenario_json}");
    println!("samples:            {}", run.len());
    println!(
        "steady speed:       {} rad/s ({} RPM)",
        sig6(s.steady_speed),
        sig6(MotorParameters::rad_s_to_rpm(s.steady_speed))
    );
    println!("peak current:       {} A", sig6(s.peak_stator_current));
    println!("mean input power:   {} W", sig6(s.mean_input_power));
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_generate(ctx: &Ctx, a: &GenerateArgs) -> Result<(), CliError> {
    let plan_path = a.plan.clone().or_else(|| ctx.cfg.plan.clone());
    let mut plan = match &plan_path {
        Some(p) => GenerationPlan::from_json(&read_text(p)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => GenerationPlan::default(),
    };
    if let Some(scale) = a.scale.or(ctx.cfg.scale) {
        if !(scale > 0.0) {
            return Err(CliError::Config(format!("scale must be > 0, got {scale}")));
        }
        plan = plan.scaled(scale);
    }
    if ctx.seed_given() || plan_path.is_none() {
        plan = plan.with_seed(ctx.seed);
    }
    let dataset = generate(&plan, &MotorParameters::default())?;
    let out = ctx.out("data.csv");
    export_csv(&dataset, &out)?;
    let inputs: Vec<&Path> = plan_path.iter().map(PathBuf::as_path).collect();
    write_sidecar(
        ctx,
        "generate",
        &out,
        &inputs,
        &[&out],
        json!({ "provenance": dataset.provenance }),
    )?;
    let counts = dataset.class_counts();
    println!("records: {}", dataset.len());
    for kind in FaultKind::ALL {
        println!(
            "  {} {:<17} {}",
            kind.label(),
            kind.as_str(),
            counts[kind.label().index()]
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_split(ctx: &Ctx, a: &SplitArgs) -> Result<(), CliError> {
    let ratio = a.ratio.or(ctx.cfg.ratio).unwrap_or(DEFAULT_RATIO);
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CliError::Config(format!(
            "ratio must be in (0, 1), got {ratio}"
        )));
    }
    let data = load_dataset(&a.data)?;
    let pair = split(&data, ratio, ctx.seed)?;
    let dir = ctx.out(".");
    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let (train, test) = (dir.join("train.csv"), dir.join("test.csv"));
    export_csv(&pair.train, &train)?;
    export_csv(&pair.test, &test)?;
    write_sidecar(
        ctx,
        "split",
        &dir,
        &[&a.data],
        &[&train, &test],
        json!({ "ratio": ratio, "train_counts": pair.train.class_counts(), "test_counts": pair.test.class_counts() }),
    )?;
    println!("train: {} records -> {}", pair.train.len(), train.display());
    println!("test:  {} records -> {}", pair.test.len(), test.display());
    Ok(())
}

fn cmd_featurize(ctx: &Ctx, a: &FeaturizeArgs) -> Result<(), CliError> {
    let scenario = match &a.scenario {
        Some(p) => FaultScenario::from_json(&read_text(p)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => FaultScenario::healthy(),
    };
    let file = File::open(&a.run).map_err(|e| io_error(&a.run, e))?;
    let run = TimeSeriesRun::read_csv(BufReader::new(file), &scenario.id())
        .map_err(|e| CliError::Runtime(format!("{}: {e}", a.run.display())))?;
    let config = FeatureConfig::default();
    // Pre-onset samples of a faulted run are dropped rather than labeled.
    let first = if scenario.label().kind() == FaultKind::Healthy {
        0
    } else {
        run.samples
            .iter()
            .position(|s| s.time >= scenario.onset_time)
            .unwrap_or(run.len())
    };
    let records = featurize_range(&run, &scenario, &config, first..run.len())?;
    let dataset = Dataset::new(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        records.iter().map(|r| r.to_row()).collect(),
        records.iter().map(|r| r.label).collect(),
    )?;
    let out = ctx.out("features.csv");
    export_csv(&dataset, &out)?;
    let mut inputs: Vec<&Path> = vec![&a.run];
    inputs.extend(a.scenario.as_deref());
    write_sidecar(
        ctx,
        "featurize",
        &out,
        &inputs,
        &[&out],
        json!({ "scenario": scenario, "features": config }),
    )?;
    println!("{} records -> {}", dataset.len(), out.display());
    Ok(())
}

fn with_hyper(spec: ModelSpec, h: &HyperArgs, cfg: &ConfigFile, seed: u64) -> ModelSpec {
    let epochs = h.epochs.or(cfg.epochs);
    let lr = h.learning_rate.or(cfg.learning_rate);
    match spec {
        ModelSpec::DecisionTree(mut p) => {
            p.max_depth = h.max_depth.or(cfg.max_depth).unwrap_or(p.max_depth);
            p.min_samples_leaf = h
                .min_samples_leaf
                .or(cfg.min_samples_leaf)
                .unwrap_or(p.min_samples_leaf);
            p.min_gain = h.min_gain.or(cfg.min_gain).unwrap_or(p.min_gain);
            ModelSpec::DecisionTree(p)
        }
        ModelSpec::GaussianNb(p) => ModelSpec::GaussianNb(p),
        ModelSpec::LogisticRegression(mut p) => {
            p.epochs = epochs.unwrap_or(p.epochs);
            p.learning_rate = lr.unwrap_or(p.learning_rate);
            ModelSpec::LogisticRegression(p)
        }
        ModelSpec::LinearSvm(mut p) => {
            p.epochs = epochs.unwrap_or(p.epochs);
            p.learning_rate = lr.unwrap_or(p.learning_rate);
            p.c = h.c.or(cfg.c).unwrap_or(p.c);
            p.seed = seed;
            ModelSpec::LinearSvm(p)
        }
    }
}

fn parse_spec(name: &str) -> Result<ModelSpec, CliError> {
    name.trim().parse().map_err(CliError::Config)
}

fn cmd_train(ctx: &Ctx, a: &TrainArgs) -> Result<(), CliError> {
    let name = a
        .model
        .clone()
        .or_else(|| ctx.cfg.models.as_ref().and_then(|m| m.first().cloned()))
        .unwrap_or_else(|| "tree".to_string());
    let spec = with_hyper(parse_spec(&name)?, &a.hyper, ctx.cfg, ctx.seed);
    let data = load_dataset(&a.data)?;
    let model = train_model(&spec, &data)?;
    let out = ctx.out("model.json");
    ensure_parent(&out)?;
    serialize_model(&model, &out)?;
    write_sidecar(
        ctx,
        "train",
        &out,
        &[&a.data],
        &[&out],
        json!({ "spec": spec, "records": data.len() }),
    )?;
    println!(
        "trained {} on {} records -> {}",
        spec.name(),
        data.len(),
        out.display()
    );
    Ok(())
}

fn cmd_evaluate(ctx: &Ctx, a: &EvaluateArgs) -> Result<(), CliError> {
    let model = deserialize_model(&a.model)?;
    let data = load_dataset(&a.data)?;
    if data.feature_names != model.feature_names {
        return Err(CliError::Runtime(format!(
            "{} has columns {:?}, model expects {:?}",
            a.data.display(),
            data.feature_names,
            model.feature_names
        )));
    }
    let report = evaluate(&model, &data)?;
    let out = ctx.out("report.json");
    write_text(&out, &format!("{}\n", report.to_json()))?;
    write_sidecar(
        ctx,
        "evaluate",
        &out,
        &[&a.model, &a.data],
        &[&out],
        json!({}),
    )?;
    print!("{}", report.to_table());
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_compare(ctx: &Ctx, a: &CompareArgs) -> Result<(), CliError> {
    let names = a
        .models
        .clone()
        .or_else(|| ctx.cfg.models.clone())
        .unwrap_or_else(|| ["tree", "gnb", "logreg", "svm"].map(String::from).to_vec());
    let specs = names
        .iter()
        .map(|n| parse_spec(n).map(|s| with_hyper(s, &a.hyper, ctx.cfg, ctx.seed)))
        .collect::<Result<Vec<_>, _>>()?;
    let train = load_dataset(&a.train)?;
    let test = load_dataset(&a.test)?;
    let entries = compare_models(&train, &test, &specs)?;

    let dir = ctx.out("compare");
    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let (json_path, text_path) = (dir.join("ranking.json"), dir.join("ranking.txt"));
    let table = ranking_table(&entries);
    let mut text = table.clone();
    for r in entries.iter().filter_map(|e| e.report.as_ref()) {
        text.push('\n');
        text.push_str(&r.to_table());
    }
    write_text(
        &json_path,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&entries).expect("entries serialize")
        ),
    )?;
    write_text(&text_path, &text)?;
    write_sidecar(
        ctx,
        "compare",
        &dir,
        &[&a.train, &a.test],
        &[&json_path, &text_path],
        json!({ "specs": specs }),
    )?;
    print!("{table}");
    for e in entries.iter().filter(|e| e.error.is_some()) {
        eprintln!(
            "warning: {} failed: {}",
            e.name,
            e.error.as_deref().unwrap_or_default()
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_export_spectra(ctx: &Ctx, a: &SpectraArgs) -> Result<(), CliError> {
    let params = MotorParameters::default();
    let load = a.load.or(ctx.cfg.load).unwrap_or(params.rated_torque);
    let onset = a.onset.or(ctx.cfg.onset).unwrap_or(DEFAULT_ONSET);
    let settings = SimulationSettings::default();
    let config = FeatureConfig::default();
    let end_time = onset + SPECTRA_LAG;
    let end = (end_time * settings.sample_rate).round() as usize;
    if end < config.window_len || end > settings.sample_count() {
        return Err(CliError::Config(format!(
            "onset {onset} s leaves no full window ending at {end_time} s"
        )));
    }
    let faults = [
        FaultArg::Healthy,
        FaultArg::Open,
        FaultArg::Short,
        FaultArg::Overload,
        FaultArg::Brb,
    ];
    let mut columns = Vec::new();
    let mut frequencies = Vec::new();
    let mut scenarios = Vec::new();
    for fault in faults {
        let scenario = shortcut_scenario(
            &params,
            fault,
            vec![],
            load,
            onset,
            DEFAULT_OVERLOAD,
            DEFAULT_HARMONIC_AMPLITUDE,
        )?
        .with_seed(ctx.seed);
        let run = simulate(&params, &scenario, load, &settings, ctx.seed)?;
        let current = run.stator_current_a();
        let window = SignalWindow::new(
            current[end - config.window_len..end].to_vec(),
            settings.sample_rate,
        )?;
        let spectrum = fft_real_padded(&window.hann(), config.fft_len)?;
        frequencies = spectrum.bin_frequencies.clone();
        columns.push(spectrum.magnitudes.clone());
        scenarios.push(scenario);
    }

    let out = ctx.out("spectra.csv");
    let mut w = create(&out)?;
    let mut body = String::from("freq_hz,mag_healthy,mag_open,mag_short,mag_overload,mag_brb\n");
    for (k, f) in frequencies.iter().enumerate() {
        body.push_str(&sig6(*f));
        for c in &columns {
            body.push(',');
            body.push_str(&sig6(c[k]));
        }
        body.push('\n');
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_error(&out, e))?;
    write_sidecar(
        ctx,
        "export-spectra",
        &out,
        &[],
        &[&out],
        json!({ "load_torque": load, "window_end_time": end_time, "features": config, "scenarios": scenarios }),
    )?;
    println!(
        "{} bins x {} conditions -> {}",
        frequencies.len(),
        columns.len(),
        out.display()
    );
    Ok(())
}

fn cmd_export_pairs(ctx: &Ctx, a: &PairsArgs) -> Result<(), CliError> {
    let cap = a
        .per_class
        .or(ctx.cfg.per_class)
        .unwrap_or(DEFAULT_PAIRS_PER_CLASS);
    if cap == 0 {
        return Err(CliError::Config("per_class must be >= 1".into()));
    }
    let data = load_dataset(&a.data)?;
    let sample = data.subset(&sample_per_class(&data, cap, ctx.seed));
    let out = ctx.out("pairs.csv");
    export_csv(&sample, &out)?;
    write_sidecar(
        ctx,
        "export-pairs",
        &out,
        &[&a.data],
        &[&out],
        json!({ "per_class": cap, "counts": sample.class_counts() }),
    )?;
    println!("{} rows -> {}", sample.len(), out.display());
    Ok(())
}
