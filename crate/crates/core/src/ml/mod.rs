//! Classifiers trained from scratch on feature datasets, plus evaluation.
//!
//! All trainers are deterministic in their inputs and seeds. Every argmax
//! resolves ties to the lowest class label.

mod compare;
mod gnb;
mod logreg;
mod metrics;
mod model;
mod svm;
mod tree;

pub use compare::{compare_models, ranking_table, ComparisonEntry};
pub use gnb::{train_gnb, GaussianNBModel, GnbParams, VARIANCE_FLOOR};
pub use logreg::{loss_and_gradient, train_logreg, LogRegParams, LogisticModel};
pub use metrics::{evaluate, evaluate_predictions, EvaluationReport};
pub use model::{
    deserialize_model, serialize_model, train_model, Classifier, ModelBody, ModelSpec,
    TrainedModel, MODEL_FORMAT, MODEL_VERSION,
};
pub use svm::{hinge_objective, sample_subgradient, train_svm, LinearSVMModel, SvmParams};
pub use tree::{
    best_split, gini, gini_counts, train_tree, DecisionTreeModel, Node, SplitCandidate, TreeParams,
};

use crate::dataset::Dataset;
use crate::error::MlError;
use crate::fault::FaultLabel;

pub(crate) const K: usize = FaultLabel::COUNT;

pub(crate) fn check_arity(expected: usize, record: &[f64]) -> Result<(), MlError> {
    if record.len() == expected {
        Ok(())
    } else {
        Err(MlError::ArityMismatch {
            expected,
            found: record.len(),
        })
    }
}

pub(crate) fn check_training_set(train: &Dataset) -> Result<(), MlError> {
    if train.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    for row in &train.features {
        check_arity(train.arity(), row)?;
    }
    Ok(())
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn label_at(index: usize) -> FaultLabel {
    FaultLabel::new(index as u8).expect("class index below label count")
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
