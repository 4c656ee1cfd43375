//! Model specs, the trained-model envelope, and its JSON file format.
//!
//! A model file looks like
//!
//! ```text
//! {
//!   "format": "motorfault-model",
//!   "version": 1,
//!   "feature_names": [...],
//!   "scaler": null | {"mean": [...], "std": [...]},
//!   "model": {"type": "decision_tree" | "gaussian_nb" | "logistic_regression" | "linear_svm", ...}
//! }
//! ```
//!
//! When `scaler` is present, records are z-scored with it before the inner
//! model sees them.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gnb::{train_gnb, GaussianNBModel, GnbParams};
use super::logreg::{train_logreg, LogRegParams, LogisticModel};
use super::svm::{train_svm, LinearSVMModel, SvmParams};
use super::tree::{train_tree, DecisionTreeModel, Node, TreeParams};
use super::{check_arity, K};
use crate::dataset::{Dataset, Scaler};
use crate::error::MlError;
use crate::fault::FaultLabel;

pub const MODEL_FORMAT: &str = "motorfault-model";
pub const MODEL_VERSION: u32 = 1;

pub trait Classifier {
    fn predict(&self, record: &[f64]) -> Result<FaultLabel, MlError>;
    fn model_id(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    DecisionTree(TreeParams),
    GaussianNb(GnbParams),
    LogisticRegression(LogRegParams),
    LinearSvm(SvmParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::DecisionTree(_) => "decision_tree",
            ModelSpec::GaussianNb(_) => "gaussian_nb",
            ModelSpec::LogisticRegression(_) => "logistic_regression",
            ModelSpec::LinearSvm(_) => "linear_svm",
        }
    }

    /// The four model families with default hyperparameters.
    pub fn defaults() -> Vec<ModelSpec> {
        vec![
            ModelSpec::DecisionTree(TreeParams::default()),
            ModelSpec::GaussianNb(GnbParams::default()),
            ModelSpec::LogisticRegression(LogRegParams::default()),
            ModelSpec::LinearSvm(SvmParams::default()),
        ]
    }
}

impl FromStr for ModelSpec {
    type Err = String;

    /// Short or full family name, with default hyperparameters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" | "decision_tree" => Ok(ModelSpec::DecisionTree(TreeParams::default())),
            "gnb" | "gaussian_nb" => Ok(ModelSpec::GaussianNb(GnbParams::default())),
            "logreg" | "logistic_regression" => {
                Ok(ModelSpec::LogisticRegression(LogRegParams::default()))
            }
            "svm" | "linear_svm" => Ok(ModelSpec::LinearSvm(SvmParams::default())),
            other => Err(format!(
                "unknown model {other:?}; expected tree, gnb, logreg or svm"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelBody {
    DecisionTree(DecisionTreeModel),
    GaussianNb(GaussianNBModel),
    LogisticRegression(LogisticModel),
    LinearSvm(LinearSVMModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    pub scaler: Option<Scaler>,
    pub model: ModelBody,
}

impl TrainedModel {
    pub fn name(&self) -> &'static str {
        match self.model {
            ModelBody::DecisionTree(_) => "decision_tree",
            ModelBody::GaussianNb(_) => "gaussian_nb",
            ModelBody::LogisticRegression(_) => "logistic_regression",
            ModelBody::LinearSvm(_) => "linear_svm",
        }
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    fn check_schema(&self) -> Result<(), String> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(format!(
                "expected format {MODEL_FORMAT:?} version {MODEL_VERSION}, found {:?} version {}",
                self.format, self.version
            ));
        }
        let d = self.arity();
        if d == 0 {
            return Err("feature_names is empty".into());
        }
        if let Some(s) = &self.scaler {
            if s.mean.len() != d || s.std.len() != d {
                return Err("scaler length differs from feature count".into());
            }
        }
        let matrix_ok = |w: &[Vec<f64>], b: &[f64], rows: usize| {
            w.len() == rows && b.len() == rows && w.iter().all(|r| r.len() == d)
        };
        match &self.model {
            ModelBody::DecisionTree(t) => {
                fn features_ok(n: &Node, d: usize) -> bool {
                    match n {
                        Node::Leaf { .. } => true,
                        Node::Split {
                            feature,
                            left,
                            right,
                            ..
                        } => *feature < d && features_ok(left, d) && features_ok(right, d),
                    }
                }
                if t.arity != d || !features_ok(&t.root, d) {
                    return Err("tree refers to features outside feature_names".into());
                }
            }
            ModelBody::GaussianNb(g) => {
                let c = g.priors.len();
                if c == 0
                    || c > K
                    || !matrix_ok(&g.means, &g.priors, c)
                    || !matrix_ok(&g.variances, &g.priors, c)
                {
                    return Err("naive Bayes tables have inconsistent shapes".into());
                }
                if g.variances.iter().flatten().any(|v| !(*v > 0.0)) {
                    return Err("naive Bayes variance must be positive".into());
                }
            }
            ModelBody::LogisticRegression(m) => {
                if !matrix_ok(&m.weights, &m.bias, K) {
                    return Err("logistic weights have inconsistent shapes".into());
                }
            }
            ModelBody::LinearSvm(m) => {
                if !matrix_ok(&m.weights, &m.bias, K) {
                    return Err("SVM weights have inconsistent shapes".into());
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MlError> {
        let m: Self = serde_json::from_str(text).map_err(|e| MlError::Schema(e.to_string()))?;
        m.check_schema().map_err(MlError::Schema)?;
        Ok(m)
    }
}

impl Classifier for TrainedModel {
    fn predict(&self, record: &[f64]) -> Result<FaultLabel, MlError> {
        check_arity(self.arity(), record)?;
        let scaled;
        let x = match &self.scaler {
            Some(s) => {
                scaled = s.transform_row(record);
                &scaled[..]
            }
            None => record,
        };
        match &self.model {
            ModelBody::DecisionTree(m) => m.predict(x),
            ModelBody::GaussianNb(m) => m.predict(x),
            ModelBody::LogisticRegression(m) => m.predict(x),
            ModelBody::LinearSvm(m) => m.predict(x),
        }
    }

    fn model_id(&self) -> String {
        self.name().to_string()
    }
}

/// Trains one model. Logistic regression and the SVM see z-scored features,
/// with the scaler fitted on `train` and stored in the model.
pub fn train_model(spec: &ModelSpec, train: &Dataset) -> Result<TrainedModel, MlError> {
    if train.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let scaled = |train: &Dataset| -> Result<(Scaler, Dataset), MlError> {
        let scaler = Scaler::fit(train).map_err(|_| MlError::EmptyDataset)?;
        let data = scaler.transform(train);
        Ok((scaler, data))
    };
    let (scaler, model) = match spec {
        ModelSpec::DecisionTree(p) => (None, ModelBody::DecisionTree(train_tree(train, p)?)),
        ModelSpec::GaussianNb(p) => (None, ModelBody::GaussianNb(train_gnb(train, p)?)),
        ModelSpec::LogisticRegression(p) => {
            let (s, d) = scaled(train)?;
            (Some(s), ModelBody::LogisticRegression(train_logreg(&d, p)?))
        }
        ModelSpec::LinearSvm(p) => {
            let (s, d) = scaled(train)?;
            (Some(s), ModelBody::LinearSvm(train_svm(&d, p)?))
        }
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        feature_names: train.feature_names.clone(),
        scaler,
        model,
    })
}

pub fn serialize_model(model: &TrainedModel, path: &Path) -> Result<(), MlError> {
    let mut text = model.to_json();
    text.push('\n');
    std::fs::write(path, text).map_err(|source| MlError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn deserialize_model(path: &Path) -> Result<TrainedModel, MlError> {
    let text = std::fs::read_to_string(path).map_err(|source| MlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    TrainedModel::from_json(&text)
}
