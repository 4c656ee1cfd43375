//! `motorfault`: simulate, generate, featurize, train, evaluate, compare and
//! export plot data.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ConfigFile;
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "motorfault",
    version,
    about = "Induction motor fault simulation and classification"
)]
pub struct Cli {
    /// Base random seed [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (or directory for split and compare)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file with defaults for any option; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one run and write its time series as CSV
    Simulate(SimulateArgs),
    /// Generate the labeled feature dataset
    Generate(GenerateArgs),
    /// Stratified train/test split of a dataset CSV
    Split(SplitArgs),
    /// Turn a run CSV into feature records
    Featurize(FeaturizeArgs),
    /// Train one classifier
    Train(TrainArgs),
    /// Evaluate a trained model on a dataset
    Evaluate(EvaluateArgs),
    /// Train and rank several classifiers on the same split
    Compare(CompareArgs),
    /// Stator current spectra of each condition, as CSV
    ExportSpectra(SpectraArgs),
    /// Per-class sample of feature rows for scatter-matrix plots
    ExportPairs(PairsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    Healthy,
    Open,
    Short,
    Overload,
    Brb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    A,
    B,
    C,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON document; overrides the fault shortcut flags
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "healthy")]
    pub fault: FaultArg,
    /// Faulted phase(s) for open and short; short defaults to all three
    #[arg(long, value_enum)]
    pub phase: Vec<PhaseArg>,
    /// Background load, N·m [default: rated torque]
    #[arg(long)]
    pub load: Option<f64>,
    /// Fault onset, s [default: 1.0]
    #[arg(long)]
    pub onset: Option<f64>,
    /// Overload factor [default: 1.5]
    #[arg(long)]
    pub overload_factor: Option<f64>,
    /// Sideband amplitude fraction for brb [default: 0.1]
    #[arg(long)]
    pub harmonic_amplitude: Option<f64>,
    /// Run length, s [default: 5]
    #[arg(long)]
    pub duration: Option<f64>,
    /// Output sample rate, Hz [default: 2000]
    #[arg(long)]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generation plan JSON [default: built-in 150,000-record plan]
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Multiply every class count by this factor
    #[arg(long)]
    pub scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Training fraction [default: 0.7]
    #[arg(long)]
    pub ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Run CSV written by `simulate`
    #[arg(long)]
    pub run: PathBuf,
    /// Scenario JSON of the run (labels the records) [default: healthy]
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct HyperArgs {
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub min_gain: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// SVM regularization constant
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// tree, gnb, logreg or svm
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated model list [default: tree,gnb,logreg,svm]
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    /// Background load, N·m [default: rated torque]
    #[arg(long)]
    pub load: Option<f64>,
    /// Fault onset, s [default: 1.0]
    #[arg(long)]
    pub onset: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Maximum rows kept per class [default: 2000]
    #[arg(long)]
    pub per_class: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return fail(e),
    };
    match commands::run(&cli, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(e.exit_code() as u8)
}
