//! Linear one-vs-rest SVM trained by stochastic subgradient descent.
//!
//! Each binary machine minimizes
//! `λ/2·|w|² + (1/n)·Σ max(0, 1 − y·(w·x + b))` with `λ = 1/(C·n)`, the
//! usual `½|w|² + C·Σ hinge` objective divided by `C·n`. The bias is not
//! regularized. Each epoch visits the records in a fresh permutation drawn
//! from a ChaCha8 generator seeded with `seed`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_arity, check_training_set, dot, label_at, K};
use crate::dataset::Dataset;
use crate::error::MlError;
use crate::fault::FaultLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epochs: 20,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSVMModel {
    /// One machine per class, separating it from all others.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub params: SvmParams,
    /// Sum of the machines' objectives after each epoch.
    pub objective_trace: Vec<f64>,
}

impl LinearSVMModel {
    pub fn arity(&self) -> usize {
        self.weights[0].len()
    }

    pub fn scores(&self, record: &[f64]) -> Result<Vec<f64>, MlError> {
        check_arity(self.arity(), record)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, record) + b)
            .collect())
    }

    pub fn predict(&self, record: &[f64]) -> Result<FaultLabel, MlError> {
        Ok(label_at(argmax(&self.scores(record)?)))
    }
}

/// Regularized mean hinge loss of one binary machine; `ys` are ±1.
pub fn hinge_objective(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], lambda: f64) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .sum();
    0.5 * lambda * dot(w, w) + hinge / xs.len() as f64
}

/// Subgradient of `λ/2·|w|² + max(0, 1 − y·(w·x + b))` at `(w, b)`.
pub fn sample_subgradient(w: &[f64], b: f64, x: &[f64], y: f64, lambda: f64) -> (Vec<f64>, f64) {
    let active = y * (dot(w, x) + b) < 1.0;
    let gw = w
        .iter()
        .zip(x)
        .map(|(wi, xi)| lambda * wi - if active { y * xi } else { 0.0 })
        .collect();
    (gw, if active { -y } else { 0.0 })
}

pub fn train_svm(train: &Dataset, params: &SvmParams) -> Result<LinearSVMModel, MlError> {
    check_training_set(train)?;
    if !(params.c > 0.0) || params.epochs == 0 || !(params.learning_rate > 0.0) {
        return Err(MlError::InvalidHyperparameters(format!(
            "need C > 0, epochs >= 1, learning_rate > 0; got {}, {}, {}",
            params.c, params.epochs, params.learning_rate
        )));
    }
    let n = train.len();
    let d = train.arity();
    let lambda = 1.0 / (params.c * n as f64);
    let mut weights = vec![vec![0.0; d]; K];
    let mut bias = vec![0.0; K];
    let mut objective_trace = vec![0.0; params.epochs];

    for k in 0..K {
        let ys: Vec<f64> = train
            .labels
            .iter()
            .map(|l| if l.index() == k { 1.0 } else { -1.0 })
            .collect();
        let (w, b) = (&mut weights[k], &mut bias[k]);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut order: Vec<usize> = (0..n).collect();
        for (epoch, trace) in objective_trace.iter_mut().enumerate() {
            order.shuffle(&mut rng);
            for &i in &order {
                let (x, y) = (&train.features[i], ys[i]);
                let active = y * (dot(w, x) + *b) < 1.0;
                for (wi, xi) in w.iter_mut().zip(x) {
                    *wi -=
                        params.learning_rate * (lambda * *wi - if active { y * xi } else { 0.0 });
                }
                if active {
                    *b += params.learning_rate * y;
                }
            }
            let obj = hinge_objective(w, *b, &train.features, &ys, lambda);
            if !obj.is_finite() {
                return Err(MlError::NonFiniteLoss { epoch });
            }
            *trace += obj;
        }
    }
    Ok(LinearSVMModel {
        weights,
        bias,
        params: *params,
        objective_trace,
    })
}
