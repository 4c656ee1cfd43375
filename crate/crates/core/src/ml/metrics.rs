use serde::{Deserialize, Serialize};

use super::{Classifier, K};
use crate::dataset::Dataset;
use crate::error::MlError;
use crate::fault::{FaultKind, FaultLabel};

/// Confusion matrix (rows are true labels) and derived metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model_id: String,
    pub confusion_matrix: [[usize; K]; K],
    pub total: usize,
    pub accuracy: f64,
    pub precision: [f64; K],
    pub recall: [f64; K],
    pub f1: [f64; K],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate_predictions(
    model_id: &str,
    truth: &[FaultLabel],
    predicted: &[FaultLabel],
) -> Result<EvaluationReport, MlError> {
    if truth.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    assert_eq!(truth.len(), predicted.len(), "one prediction per record");
    let mut cm = [[0usize; K]; K];
    for (t, p) in truth.iter().zip(predicted) {
        cm[t.index()][p.index()] += 1;
    }
    let total = truth.len();
    let trace: usize = (0..K).map(|i| cm[i][i]).sum();
    let mut precision = [0.0; K];
    let mut recall = [0.0; K];
    let mut f1 = [0.0; K];
    for c in 0..K {
        let predicted_c: usize = (0..K).map(|r| cm[r][c]).sum();
        let actual_c: usize = cm[c].iter().sum();
        precision[c] = ratio(cm[c][c], predicted_c);
        recall[c] = ratio(cm[c][c], actual_c);
        let s = precision[c] + recall[c];
        f1[c] = if s == 0.0 {
            0.0
        } else {
            2.0 * precision[c] * recall[c] / s
        };
    }
    let mean = |v: &[f64; K]| v.iter().sum::<f64>() / K as f64;
    Ok(EvaluationReport {
        model_id: model_id.to_string(),
        confusion_matrix: cm,
        total,
        accuracy: ratio(trace, total),
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        precision,
        recall,
        f1,
    })
}

pub fn evaluate(model: &impl Classifier, test: &Dataset) -> Result<EvaluationReport, MlError> {
    if test.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let predicted = test
        .features
        .iter()
        .map(|r| model.predict(r))
        .collect::<Result<Vec<_>, _>>()?;
    evaluate_predictions(&model.model_id(), &test.labels, &predicted)
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text rendering: confusion matrix, then per-class metrics.
    pub fn to_table(&self) -> String {
        let names: Vec<&str> = FaultKind::ALL.iter().map(|k| k.as_str()).collect();
        let w = names.iter().map(|n| n.len()).max().unwrap_or(0).max(9);
        let mut out = format!(
            "model: {}\naccuracy: {:.4} ({} records)\n\n",
            self.model_id, self.accuracy, self.total
        );
        out.push_str(&format!("{:<w$}", "true\\pred"));
        for n in &names {
            out.push_str(&format!(" {n:>w$}"));
        }
        out.push('\n');
        for (r, row) in self.confusion_matrix.iter().enumerate() {
            out.push_str(&format!("{:<w$}", names[r]));
            for v in row {
                out.push_str(&format!(" {v:>w$}"));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "\n{:<w$} {:>9} {:>9} {:>9}\n",
            "class", "precision", "recall", "f1"
        ));
        for c in 0..K {
            out.push_str(&format!(
                "{:<w$} {:>9.4} {:>9.4} {:>9.4}\n",
                names[c], self.precision[c], self.recall[c], self.f1[c]
            ));
        }
        out.push_str(&format!(
            "{:<w$} {:>9.4} {:>9.4} {:>9.4}\n",
            "macro", self.macro_precision, self.macro_recall, self.macro_f1
        ));
        out
    }
}
