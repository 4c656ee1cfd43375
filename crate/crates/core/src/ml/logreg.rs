//! Multinomial logistic regression fitted by full-batch gradient descent on
//! the mean cross-entropy, starting from zero weights.

use serde::{Deserialize, Serialize};

use super::{argmax, check_arity, check_training_set, dot, label_at, K};
use crate::dataset::Dataset;
use crate::error::MlError;
use crate::fault::FaultLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// One row per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Loss before each update.
    pub loss_trace: Vec<f64>,
}

fn softmax(scores: &mut [f64]) {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    scores.iter_mut().for_each(|s| *s /= total);
}

fn scores(weights: &[Vec<f64>], bias: &[f64], x: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(bias)
        .map(|(w, b)| dot(w, x) + b)
        .collect()
}

/// Mean cross-entropy and its gradient with respect to weights and bias.
pub fn loss_and_gradient(
    weights: &[Vec<f64>],
    bias: &[f64],
    features: &[Vec<f64>],
    labels: &[FaultLabel],
) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let n = features.len() as f64;
    let mut gw = vec![vec![0.0; weights[0].len()]; weights.len()];
    let mut gb = vec![0.0; bias.len()];
    let mut loss = 0.0;
    for (x, y) in features.iter().zip(labels) {
        let s = scores(weights, bias, x);
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - s[y.index()];
        let p: Vec<f64> = s.iter().map(|v| (v - lse).exp()).collect();
        for c in 0..p.len() {
            let r = p[c] - if c == y.index() { 1.0 } else { 0.0 };
            gb[c] += r;
            for (g, xi) in gw[c].iter_mut().zip(x) {
                *g += r * xi;
            }
        }
    }
    gw.iter_mut().flatten().for_each(|g| *g /= n);
    gb.iter_mut().for_each(|g| *g /= n);
    (loss / n, gw, gb)
}

impl LogisticModel {
    pub fn arity(&self) -> usize {
        self.weights[0].len()
    }

    pub fn probabilities(&self, record: &[f64]) -> Result<Vec<f64>, MlError> {
        check_arity(self.arity(), record)?;
        let mut p = scores(&self.weights, &self.bias, record);
        softmax(&mut p);
        Ok(p)
    }

    pub fn predict(&self, record: &[f64]) -> Result<FaultLabel, MlError> {
        check_arity(self.arity(), record)?;
        Ok(label_at(argmax(&scores(&self.weights, &self.bias, record))))
    }
}

pub fn train_logreg(train: &Dataset, params: &LogRegParams) -> Result<LogisticModel, MlError> {
    check_training_set(train)?;
    if params.epochs == 0 || !(params.learning_rate > 0.0) {
        return Err(MlError::InvalidHyperparameters(format!(
            "epochs must be >= 1 and learning_rate > 0, got {} and {}",
            params.epochs, params.learning_rate
        )));
    }
    let mut weights = vec![vec![0.0; train.arity()]; K];
    let mut bias = vec![0.0; K];
    let mut loss_trace = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let (loss, gw, gb) = loss_and_gradient(&weights, &bias, &train.features, &train.labels);
        if !loss.is_finite() {
            return Err(MlError::NonFiniteLoss { epoch });
        }
        loss_trace.push(loss);
        for (w, g) in weights.iter_mut().flatten().zip(gw.iter().flatten()) {
            *w -= params.learning_rate * g;
        }
        for (b, g) in bias.iter_mut().zip(&gb) {
            *b -= params.learning_rate * g;
        }
        if weights
            .iter()
            .flatten()
            .chain(&bias)
            .any(|w| !w.is_finite())
        {
            return Err(MlError::NonFiniteLoss { epoch: epoch + 1 });
        }
    }
    Ok(LogisticModel {
        weights,
        bias,
        loss_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ds(x: Vec<Vec<f64>>, y: Vec<u8>) -> Dataset {
        let names = (0..x[0].len()).map(|i| format!("f{i}")).collect();
        Dataset::new(
            names,
            x,
            y.into_iter().map(|v| FaultLabel::new(v).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn initial_loss_is_ln5_for_balanced_classes() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 0.1, 1.0]).collect();
        let y: Vec<u8> = (0..50).map(|i| (i % 5) as u8).collect();
        let m = train_logreg(
            &ds(x, y),
            &LogRegParams {
                epochs: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((m.loss_trace[0] - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..200 {
            let c = (i % 2) as u8;
            let center = if c == 0 { -2.0 } else { 2.0 };
            x.push(vec![
                center + rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            y.push(c);
        }
        let d = ds(x, y);
        let m = train_logreg(
            &d,
            &LogRegParams {
                epochs: 500,
                learning_rate: 0.1,
            },
        )
        .unwrap();
        for (r, l) in d.features.iter().zip(&d.labels) {
            assert_eq!(m.predict(r).unwrap(), *l);
        }
        for w in m.loss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let d = 3;
            let x: Vec<Vec<f64>> = (0..12)
                .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let y: Vec<FaultLabel> = (0..12)
                .map(|_| FaultLabel::new(rng.gen_range(0..5)).unwrap())
                .collect();
            let w: Vec<Vec<f64>> = (0..K)
                .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let b: Vec<f64> = (0..K).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, gw, gb) = loss_and_gradient(&w, &b, &x, &y);
            let h = 1e-5;
            for c in 0..K {
                for j in 0..=d {
                    let eval = |delta: f64| {
                        let (mut w2, mut b2) = (w.clone(), b.clone());
                        if j < d {
                            w2[c][j] += delta;
                        } else {
                            b2[c] += delta;
                        }
                        loss_and_gradient(&w2, &b2, &x, &y).0
                    };
                    let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                    let analytic = if j < d { gw[c][j] } else { gb[c] };
                    let scale = analytic.abs().max(numeric.abs()).max(1e-3);
                    assert!(
                        (numeric - analytic).abs() / scale <= 1e-6,
                        "{numeric} vs {analytic}"
                    );
                }
            }
        }
    }

    #[test]
    fn huge_learning_rate_reports_divergence() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![1e200 * (i as f64 - 10.0)]).collect();
        let y: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let r = train_logreg(
            &ds(x, y),
            &LogRegParams {
                epochs: 50,
                learning_rate: 1e200,
            },
        );
        assert!(matches!(r, Err(MlError::NonFiniteLoss { .. })));
    }
}
