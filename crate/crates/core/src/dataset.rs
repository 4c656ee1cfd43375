//! Labeled dataset generation, persistence, splitting and scaling.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), a counter-based stream
//! cipher generator. Every run seed is derived from the plan's `base_seed`
//! by selecting ChaCha stream `(class << 32) | run` and drawing one `u64`,
//! so any run can be regenerated on its own.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DatasetError;
use crate::fault::{randomized_scenario_in, FaultKind, FaultLabel, ScenarioDraw};
use crate::features::{featurize_range, FeatureConfig, FEATURE_NAMES};
use crate::fmt::sig6;
use crate::motor::{simulate, MotorParameters, SimulationSettings};

pub const GENERATOR_VERSION: &str = concat!("motorfault ", env!("CARGO_PKG_VERSION"));

/// How many records of each class to generate and from which seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationPlan {
    pub total_points: usize,
    pub healthy_fraction: f64,
    pub per_fault_counts: BTreeMap<FaultKind, usize>,
    pub base_seed: u64,
    /// Background load interval, N·m.
    pub load_range: (f64, f64),
}

impl Default for GenerationPlan {
    /// 90,000 healthy and 15,000 of each fault: 150,000 records.
    fn default() -> Self {
        let rated = MotorParameters::default().rated_torque;
        Self {
            total_points: 150_000,
            healthy_fraction: 0.6,
            per_fault_counts: FaultKind::ALL[1..].iter().map(|&k| (k, 15_000)).collect(),
            base_seed: 42,
            load_range: (0.5 * rated, rated),
        }
    }
}

impl GenerationPlan {
    /// Every count multiplied by `factor` and rounded.
    pub fn scaled(&self, factor: f64) -> Self {
        let per_fault_counts: BTreeMap<_, _> = self
            .per_fault_counts
            .iter()
            .map(|(&k, &n)| (k, (n as f64 * factor).round() as usize))
            .collect();
        let healthy = (self.healthy_count() as f64 * factor).round() as usize;
        let total = healthy + per_fault_counts.values().sum::<usize>();
        Self {
            total_points: total,
            healthy_fraction: if total > 0 {
                healthy as f64 / total as f64
            } else {
                0.0
            },
            per_fault_counts,
            ..self.clone()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn healthy_count(&self) -> usize {
        self.total_points
            .saturating_sub(self.per_fault_counts.values().sum::<usize>())
    }

    pub fn count_for(&self, kind: FaultKind) -> usize {
        match kind {
            FaultKind::Healthy => self.healthy_count(),
            k => self.per_fault_counts.get(&k).copied().unwrap_or(0),
        }
    }

    /// Healthy runs needed at `samples_per_run` samples each.
    pub fn healthy_runs(&self, samples_per_run: usize) -> usize {
        self.healthy_count().div_ceil(samples_per_run.max(1))
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidPlan(m));
        if self.total_points == 0 {
            return bad("total_points must be > 0".into());
        }
        if self.per_fault_counts.contains_key(&FaultKind::Healthy) {
            return bad("per_fault_counts must not list healthy".into());
        }
        let faults: usize = self.per_fault_counts.values().sum();
        if faults > self.total_points {
            return bad(format!(
                "fault counts {faults} exceed total_points {}",
                self.total_points
            ));
        }
        let implied = (self.total_points as f64 * self.healthy_fraction).round() as usize;
        if implied != self.healthy_count() {
            return bad(format!(
                "healthy_fraction {} implies {implied} healthy points but counts leave {}",
                self.healthy_fraction,
                self.healthy_count()
            ));
        }
        let (lo, hi) = self.load_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return bad(format!("load_range ({lo}, {hi}) is not a valid interval"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let plan: Self =
            serde_json::from_str(text).map_err(|e| DatasetError::InvalidPlan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }
}

/// Seed of run `run` of class `label` under `base_seed`.
pub fn run_seed(base_seed: u64, label: FaultLabel, run: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream((u64::from(label.value()) << 32) | u64::from(run));
    rng.next_u64()
}

/// One simulated run that fed the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub draw: ScenarioDraw,
    pub seed: u64,
    /// First sample index taken from the run.
    pub first_sample: usize,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub plan: GenerationPlan,
    pub generator_version: String,
    pub settings: SimulationSettings,
    pub features: FeatureConfig,
    pub runs: Vec<RunRecord>,
}

/// Labeled feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<FaultLabel>,
    pub provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<FaultLabel>,
    ) -> Result<Self, DatasetError> {
        if features.len() != labels.len() {
            return Err(DatasetError::InvalidPlan(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(DatasetError::ArityMismatch {
                    line: i + 2,
                    expected: feature_names.len() + 1,
                    found: row.len() + 1,
                });
            }
        }
        Ok(Self {
            feature_names,
            features,
            labels,
            provenance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; FaultLabel::COUNT] {
        let mut counts = [0; FaultLabel::COUNT];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order, without provenance.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            provenance: None,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = self.feature_names.join(",");
        if !header.is_empty() {
            header.push(',');
        }
        header.push_str("label\n");
        out.write_all(header.as_bytes())?;
        let mut line = String::with_capacity(16 * (self.arity() + 1));
        for (row, label) in self.features.iter().zip(&self.labels) {
            line.clear();
            for v in row {
                line.push_str(&sig6(*v));
                line.push(',');
            }
            line.push_str(&label.to_string());
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, DatasetError> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(h) => h.map_err(|e| DatasetError::io("<dataset csv>", e))?,
            None => {
                return Err(DatasetError::Parse {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        };
        let mut names: Vec<String> = header
            .trim_end()
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        if names.last().map(String::as_str) != Some("label") {
            return Err(DatasetError::Parse {
                line: 1,
                message: "last column must be `label`".into(),
            });
        }
        names.pop();
        let width = names.len() + 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| DatasetError::io("<dataset csv>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            if fields.len() != width {
                return Err(DatasetError::ArityMismatch {
                    line: line_no,
                    expected: width,
                    found: fields.len(),
                });
            }
            let row = fields[..width - 1]
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| DatasetError::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            let raw = fields[width - 1].trim();
            let label = raw
                .parse::<u8>()
                .ok()
                .and_then(FaultLabel::new)
                .ok_or_else(|| DatasetError::Parse {
                    line: line_no,
                    message: format!("label {raw:?} is not an integer in 0..=4"),
                })?;
            features.push(row);
            labels.push(label);
        }
        Ok(Self {
            feature_names: names,
            features,
            labels,
            provenance: None,
        })
    }
}

pub fn export_csv(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let file = std::fs::File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    dataset
        .write_csv(&mut w)
        .map_err(|e| DatasetError::io(path, e))?;
    w.flush().map_err(|e| DatasetError::io(path, e))
}

pub fn import_csv(path: &Path) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    Dataset::read_csv(std::io::BufReader::new(file))
}

struct RunJob {
    kind: FaultKind,
    seed: u64,
    draw: ScenarioDraw,
    first_sample: usize,
    records: usize,
}

fn plan_jobs(
    plan: &GenerationPlan,
    params: &MotorParameters,
    settings: &SimulationSettings,
) -> Result<Vec<RunJob>, DatasetError> {
    const MAX_RUNS_PER_CLASS: u32 = 100_000;
    let per_run = settings.sample_count();
    let sample_time = |i: usize| (i + 1) as f64 / settings.sample_rate;
    let mut jobs = Vec::new();
    for kind in FaultKind::ALL {
        let mut remaining = plan.count_for(kind);
        let mut run = 0u32;
        while remaining > 0 {
            if run == MAX_RUNS_PER_CLASS {
                return Err(DatasetError::InvalidPlan(format!(
                    "{kind}: no usable samples after {run} runs"
                )));
            }
            let seed = run_seed(plan.base_seed, kind.label(), run);
            let draw = randomized_scenario_in(kind, seed, params, plan.load_range);
            // Only post-onset samples of a faulted run carry its label.
            let first_sample = if kind == FaultKind::Healthy {
                0
            } else {
                (0..per_run)
                    .find(|&i| sample_time(i) >= draw.scenario.onset_time)
                    .unwrap_or(per_run)
            };
            let records = (per_run - first_sample).min(remaining);
            if records > 0 {
                jobs.push(RunJob {
                    kind,
                    seed,
                    draw,
                    first_sample,
                    records,
                });
                remaining -= records;
            }
            run += 1;
        }
    }
    Ok(jobs)
}

/// Simulates and featurizes every run the plan calls for.
///
/// Runs execute in parallel; records are concatenated in plan order (class
/// by class, run by run), so the output does not depend on scheduling.
pub fn generate(plan: &GenerationPlan, params: &MotorParameters) -> Result<Dataset, DatasetError> {
    generate_with(
        plan,
        params,
        &SimulationSettings::default(),
        &FeatureConfig::default(),
    )
}

pub fn generate_with(
    plan: &GenerationPlan,
    params: &MotorParameters,
    settings: &SimulationSettings,
    features: &FeatureConfig,
) -> Result<Dataset, DatasetError> {
    plan.validate()?;
    let jobs = plan_jobs(plan, params, settings)?;
    let chunks = jobs
        .par_iter()
        .map(|job| {
            let scenario = &job.draw.scenario;
            let run = simulate(params, scenario, job.draw.load_torque, settings, job.seed)
                .map_err(|source| DatasetError::Simulation {
                    scenario: scenario.id(),
                    source,
                })?;
            let range = job.first_sample..job.first_sample + job.records;
            featurize_range(&run, scenario, features, range).map_err(DatasetError::from)
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;

    let total: usize = chunks.iter().map(Vec::len).sum();
    let mut rows = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for rec in chunks.into_iter().flatten() {
        rows.push(rec.to_row());
        labels.push(rec.label);
    }
    debug_assert!(jobs
        .iter()
        .all(|j| j.draw.scenario.label() == j.kind.label()));
    Ok(Dataset {
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        features: rows,
        labels,
        provenance: Some(Provenance {
            plan: plan.clone(),
            generator_version: GENERATOR_VERSION.to_string(),
            settings: *settings,
            features: *features,
            runs: jobs
                .into_iter()
                .map(|j| RunRecord {
                    draw: j.draw,
                    seed: j.seed,
                    first_sample: j.first_sample,
                    records: j.records,
                })
                .collect(),
        }),
    })
}

/// Train/test partition of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub ratio: f64,
    pub seed: u64,
    /// Source row indices of the training partition, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Stratified shuffle split: each class contributes `round(ratio·n_class)`
/// records to the training set. Both partitions keep source order.
pub fn split(dataset: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair, DatasetError> {
    if dataset.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DatasetError::InvalidPlan(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..FaultLabel::COUNT {
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.labels[i].index() == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(class as u64);
        members.shuffle(&mut rng);
        let n_train = (ratio * members.len() as f64).round() as usize;
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPair {
        train: dataset.subset(&train),
        test: dataset.subset(&test),
        ratio,
        seed,
        train_indices: train,
        test_indices: test,
    })
}

/// Indices of at most `cap` records per class, drawn without replacement
/// and returned in source order.
pub fn sample_per_class(dataset: &Dataset, cap: usize, seed: u64) -> Vec<usize> {
    let mut keep = Vec::new();
    for class in 0..FaultLabel::COUNT {
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.labels[i].index() == class)
            .collect();
        if members.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(class as u64);
            members.shuffle(&mut rng);
            members.truncate(cap);
        }
        keep.extend(members);
    }
    keep.sort_unstable();
    keep
}

/// Per-feature z-score statistics fitted on a training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Population standard deviation; 0 marks a constant feature.
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(data: &Dataset) -> Result<Self, DatasetError> {
        if data.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        let n = data.len() as f64;
        let d = data.arity();
        let mut mean = vec![0.0; d];
        for row in &data.features {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in &data.features {
            for j in 0..d {
                var[j] += (row[j] - mean[j]).powi(2);
            }
        }
        let std = var
            .iter()
            .zip(&mean)
            .map(|(v, m)| {
                let s = (v / n).sqrt();
                if s <= 1e-12 * (1.0 + m.abs()) {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| if *s == 0.0 { 0.0 } else { (x - m) / s })
            .collect()
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        Dataset {
            feature_names: data.feature_names.clone(),
            features: data
                .features
                .iter()
                .map(|r| self.transform_row(r))
                .collect(),
            labels: data.labels.clone(),
            provenance: None,
        }
    }
}

/// Z-scores both partitions with statistics from `train` only.
pub fn standardize(
    train: &Dataset,
    test: &Dataset,
) -> Result<(Dataset, Dataset, Scaler), DatasetError> {
    let scaler = Scaler::fit(train)?;
    Ok((scaler.transform(train), scaler.transform(test), scaler))
}
