use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, EvaluationReport};
use super::model::{train_model, ModelSpec};
use crate::dataset::Dataset;
use crate::error::MlError;

/// One row of a model comparison. Exactly one of `report` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub name: String,
    pub spec: ModelSpec,
    pub report: Option<EvaluationReport>,
    pub error: Option<String>,
}

impl ComparisonEntry {
    pub fn accuracy(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.accuracy)
    }
}

/// Trains every spec on `train`, evaluates on `test`, and ranks by accuracy
/// (descending, ties by name). Failed models are listed last with their error.
pub fn compare_models(
    train: &Dataset,
    test: &Dataset,
    specs: &[ModelSpec],
) -> Result<Vec<ComparisonEntry>, MlError> {
    if specs.is_empty() {
        return Err(MlError::InvalidHyperparameters(
            "no models to compare".into(),
        ));
    }
    let mut entries: Vec<ComparisonEntry> = specs
        .par_iter()
        .map(|spec| {
            let result = train_model(spec, train).and_then(|m| evaluate(&m, test));
            let (report, error) = match result {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ComparisonEntry {
                name: spec.name().to_string(),
                spec: *spec,
                report,
                error,
            }
        })
        .collect();
    entries.sort_by(|a, b| match (a.accuracy(), b.accuracy()) {
        (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.name.cmp(&b.name)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.name.cmp(&b.name),
    });
    Ok(entries)
}

/// Plain-text ranking: rank, model, accuracy, macro F1 (or the error).
pub fn ranking_table(entries: &[ComparisonEntry]) -> String {
    let w = entries
        .iter()
        .map(|e| e.name.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!(
        "{:>4}  {:<w$}  {:>8}  {:>8}\n",
        "rank", "model", "accuracy", "macro_f1"
    );
    for (i, e) in entries.iter().enumerate() {
        match (&e.report, &e.error) {
            (Some(r), _) => out.push_str(&format!(
                "{:>4}  {:<w$}  {:>8.4}  {:>8.4}\n",
                i + 1,
                e.name,
                r.accuracy,
                r.macro_f1
            )),
            (None, err) => out.push_str(&format!(
                "{:>4}  {:<w$}  failed: {}\n",
                i + 1,
                e.name,
                err.as_deref().unwrap_or("unknown error")
            )),
        }
    }
    out
}
