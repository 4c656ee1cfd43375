//! Gaussian naive Bayes with maximum-likelihood class statistics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{argmax, check_arity, check_training_set, label_at};
use crate::dataset::Dataset;
use crate::error::MlError;
use crate::fault::FaultLabel;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    pub variance_floor: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        Self {
            variance_floor: VARIANCE_FLOOR,
        }
    }
}

/// Classes `0..priors.len()`; labels above the largest training label are
/// not modeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNBModel {
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl GaussianNBModel {
    pub fn arity(&self) -> usize {
        self.means[0].len()
    }

    /// Unnormalized log posterior of each class.
    pub fn log_scores(&self, record: &[f64]) -> Result<Vec<f64>, MlError> {
        check_arity(self.arity(), record)?;
        Ok((0..self.priors.len())
            .map(|c| {
                let ll: f64 = record
                    .iter()
                    .zip(self.means[c].iter().zip(&self.variances[c]))
                    .map(|(x, (m, v))| -0.5 * ((2.0 * PI * v).ln() + (x - m).powi(2) / v))
                    .sum();
                self.priors[c].ln() + ll
            })
            .collect())
    }

    pub fn predict(&self, record: &[f64]) -> Result<FaultLabel, MlError> {
        Ok(label_at(argmax(&self.log_scores(record)?)))
    }
}

/// Every label from 0 up to the largest one present must have a record.
pub fn train_gnb(train: &Dataset, params: &GnbParams) -> Result<GaussianNBModel, MlError> {
    check_training_set(train)?;
    if !(params.variance_floor > 0.0) {
        return Err(MlError::InvalidHyperparameters(format!(
            "variance_floor must be > 0, got {}",
            params.variance_floor
        )));
    }
    let classes = train.labels.iter().map(|l| l.index()).max().unwrap_or(0) + 1;
    let d = train.arity();
    let mut counts = vec![0usize; classes];
    let mut means = vec![vec![0.0; d]; classes];
    for (row, l) in train.features.iter().zip(&train.labels) {
        counts[l.index()] += 1;
        for (m, x) in means[l.index()].iter_mut().zip(row) {
            *m += x;
        }
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(MlError::MissingClass(c as u8));
    }
    for (m, &n) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= n as f64);
    }
    let mut variances = vec![vec![0.0; d]; classes];
    for (row, l) in train.features.iter().zip(&train.labels) {
        let c = l.index();
        for j in 0..d {
            variances[c][j] += (row[j] - means[c][j]).powi(2);
        }
    }
    for (v, &n) in variances.iter_mut().zip(&counts) {
        v.iter_mut()
            .for_each(|s| *s = (*s / n as f64).max(params.variance_floor));
    }
    let n = train.len() as f64;
    Ok(GaussianNBModel {
        priors: counts.iter().map(|&c| c as f64 / n).collect(),
        means,
        variances,
    })
}
