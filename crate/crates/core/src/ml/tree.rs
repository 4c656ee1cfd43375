//! CART decision tree with Gini impurity.
//!
//! Split quality is compared exactly. For a split with class counts `cL`,
//! `cR` the weighted child impurity is `1 - S/n` with
//! `S = Σ cL²/nL + Σ cR²/nR`, so the best split maximizes `S`. Candidates
//! are ranked by cross-multiplying the integer fractions in `u128`, and
//! floating point only enters the reported gain.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{check_arity, check_training_set, label_at, K};
use crate::dataset::Dataset;
use crate::error::MlError;
use crate::fault::FaultLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_gain: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_samples_leaf: 5,
            min_gain: 1e-7,
        }
    }
}

impl TreeParams {
    /// Grow until every leaf is pure or cannot be split.
    pub fn unbounded() -> Self {
        Self {
            max_depth: usize::MAX,
            min_samples_leaf: 1,
            min_gain: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), MlError> {
        if self.min_samples_leaf == 0 || !(self.min_gain >= 0.0) {
            return Err(MlError::InvalidHyperparameters(format!(
                "min_samples_leaf must be >= 1 and min_gain >= 0, got {} and {}",
                self.min_samples_leaf, self.min_gain
            )));
        }
        Ok(())
    }
}

/// A tree node. Records with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        class: FaultLabel,
        class_distribution: [usize; K],
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_for(&self, record: &[f64]) -> &Node {
        let mut node = self;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if record[*feature] <= *threshold {
                left
            } else {
                right
            };
        }
        node
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub root: Node,
    pub params: TreeParams,
    pub arity: usize,
}

impl DecisionTreeModel {
    pub fn predict(&self, record: &[f64]) -> Result<FaultLabel, MlError> {
        check_arity(self.arity, record)?;
        match self.root.leaf_for(record) {
            Node::Leaf { class, .. } => Ok(*class),
            Node::Split { .. } => unreachable!("traversal ends at a leaf"),
        }
    }
}

pub fn gini_counts(counts: &[usize]) -> Result<f64, MlError> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(MlError::EmptyLabelSet);
    }
    let n = n as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

pub fn gini(labels: &[FaultLabel]) -> Result<f64, MlError> {
    gini_counts(&class_counts(labels.iter().copied()))
}

fn class_counts(labels: impl Iterator<Item = FaultLabel>) -> [usize; K] {
    let mut c = [0; K];
    for l in labels {
        c[l.index()] += 1;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    /// Parent impurity minus the size-weighted child impurity.
    pub gain: f64,
}

/// `S = (a·nr + b·nl) / (nl·nr)` kept as an exact fraction.
#[derive(Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn new(sq_left: u64, n_left: u64, sq_right: u64, n_right: u64) -> Self {
        Self {
            num: sq_left as u128 * n_right as u128 + sq_right as u128 * n_left as u128,
            den: n_left as u128 * n_right as u128,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    fn gain(&self, parent_sq: u64, n: u64) -> f64 {
        let n = n as f64;
        (self.num as f64 / self.den as f64) / n - parent_sq as f64 / (n * n)
    }
}

pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = 0.5 * (lo + hi);
    // Rounding can land on `hi`, which would move it to the left side.
    if m < hi {
        m
    } else {
        lo
    }
}

/// Exhaustive search over `feature_indices` and all midpoints between
/// consecutive distinct values of the rows in `rows`.
fn best_split_rows(
    features: &[Vec<f64>],
    labels: &[FaultLabel],
    rows: &[usize],
    feature_indices: &[usize],
    params: &TreeParams,
) -> Option<SplitCandidate> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let parent = class_counts(rows.iter().map(|&i| labels[i]));
    let parent_sq: u64 = parent.iter().map(|&c| (c * c) as u64).sum();
    let min_leaf = params.min_samples_leaf.max(1);

    let mut best: Option<(Score, usize, f64)> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &f in feature_indices {
        column.clear();
        column.extend(rows.iter().map(|&i| (features[i][f], labels[i].index())));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left = [0u64; K];
        let mut right = parent.map(|c| c as u64);
        let (mut sq_left, mut sq_right) = (0u64, parent_sq);
        for i in 0..n - 1 {
            let c = column[i].1;
            sq_left += 2 * left[c] + 1;
            left[c] += 1;
            sq_right -= 2 * right[c] - 1;
            right[c] -= 1;
            let (n_left, n_right) = (i + 1, n - i - 1);
            if column[i].0 == column[i + 1].0 || n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let score = Score::new(sq_left, n_left as u64, sq_right, n_right as u64);
            // Strict improvement keeps the lowest feature and threshold on ties.
            if best
                .as_ref()
                .map_or(true, |(b, _, _)| score.cmp(b) == Ordering::Greater)
            {
                best = Some((score, f, midpoint(column[i].0, column[i + 1].0)));
            }
        }
    }

    let (score, feature, threshold) = best?;
    let gain = score.gain(parent_sq, n as u64);
    if gain < params.min_gain {
        return None;
    }
    Some(SplitCandidate {
        feature,
        threshold,
        gain,
    })
}

/// Best Gini split of all records over the given features, or `None` when
/// no admissible split reaches `params.min_gain`.
pub fn best_split(
    features: &[Vec<f64>],
    labels: &[FaultLabel],
    feature_indices: &[usize],
    params: &TreeParams,
) -> Option<SplitCandidate> {
    let rows: Vec<usize> = (0..labels.len()).collect();
    best_split_rows(features, labels, &rows, feature_indices, params)
}

fn leaf(labels: &[FaultLabel], rows: &[usize]) -> Node {
    let class_distribution = class_counts(rows.iter().map(|&i| labels[i]));
    let mut best = 0;
    for c in 1..K {
        if class_distribution[c] > class_distribution[best] {
            best = c;
        }
    }
    Node::Leaf {
        class: label_at(best),
        class_distribution,
    }
}

fn grow(
    features: &[Vec<f64>],
    labels: &[FaultLabel],
    rows: Vec<usize>,
    all_features: &[usize],
    params: &TreeParams,
    depth: usize,
) -> Node {
    let pure = rows.iter().all(|&i| labels[i] == labels[rows[0]]);
    if pure || depth >= params.max_depth || rows.len() < 2 * params.min_samples_leaf {
        return leaf(labels, &rows);
    }
    let Some(split) = best_split_rows(features, labels, &rows, all_features, params) else {
        return leaf(labels, &rows);
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| features[i][split.feature] <= split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(features, labels, l, all_features, params, depth + 1)),
        right: Box::new(grow(features, labels, r, all_features, params, depth + 1)),
    }
}

pub fn train_tree(train: &Dataset, params: &TreeParams) -> Result<DecisionTreeModel, MlError> {
    check_training_set(train)?;
    params.validate()?;
    let all_features: Vec<usize> = (0..train.arity()).collect();
    let rows: Vec<usize> = (0..train.len()).collect();
    Ok(DecisionTreeModel {
        root: grow(
            &train.features,
            &train.labels,
            rows,
            &all_features,
            params,
            0,
        ),
        params: *params,
        arity: train.arity(),
    })
}
