//! Linear C-SVM and Random Forest with a shared train/predict/score
//! contract.
//!
//! Both trainers consume a [`LabeledDataset`] and a [`TrainConfig`]; both
//! models are immutable after training, serialize to JSON bit-exactly, and
//! predict deterministically (every vote tie breaks to the lowest class
//! index). The SVM standardizes features with statistics fitted on its own
//! training rows; forests split on raw features.

mod forest;
mod svm;

pub use forest::{train_random_forest, RandomForestModel, TreeNode};
pub use svm::{train_linear_svm, LinearSvmModel, PairwiseBoundary};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeling::Label;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training data holds a single class")]
    SingleClassDataset,
    #[error("feature {index} is constant on the training rows; cannot standardize")]
    ConstantFeature { index: usize },
    #[error("each class needs at least 2 training rows; class {0} has {1}")]
    TooFewRowsPerClass(Label, usize),
    #[error("input has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("decision scores require a binary model; this one has {0} classes")]
    NotBinaryModel(usize),
    #[error("non-finite feature value in training data")]
    NonFiniteFeature,
}

/// Which classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Svm,
    Rf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::Svm, ClassifierKind::Rf];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Rf => "rf",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svm" => Ok(ClassifierKind::Svm),
            "rf" => Ok(ClassifierKind::Rf),
            _ => Err(format!("unknown classifier `{s}`")),
        }
    }
}

/// Hyperparameters for both trainers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ClassifierKind,
    /// SVM soft-margin cost.
    pub c: f64,
    /// Forest size.
    pub n_trees: usize,
    /// Features sampled per split; `None` means ⌊√n_features⌋.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    /// Train each tree on a bootstrap resample (disable to memorize).
    pub bootstrap: bool,
    /// SVM epoch cap.
    pub max_epochs: usize,
    /// SVM relative duality-gap tolerance.
    pub tolerance: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            c: 1.0,
            n_trees: 500,
            mtry: None,
            min_leaf: 1,
            bootstrap: true,
            max_epochs: 1000,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}

/// Per-feature affine rescaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits mean and population standard deviation per feature column,
    /// rejecting constant features.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, TrainError> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; d];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut std = vec![0.0; d];
        for (j, s) in var.iter().enumerate() {
            let sd = (s / n as f64).sqrt();
            if sd == 0.0 {
                return Err(TrainError::ConstantFeature { index: j });
            }
            std[j] = sd;
        }
        Ok(Self { mean, std })
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// A trained classifier of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Svm(LinearSvmModel),
    Rf(RandomForestModel),
}

impl TrainedModel {
    /// Trains the classifier `cfg.kind` selects.
    pub fn train(data: &crate::labeling::LabeledDataset, cfg: &TrainConfig) -> Result<Self, TrainError> {
        match cfg.kind {
            ClassifierKind::Svm => Ok(TrainedModel::Svm(train_linear_svm(data, cfg)?)),
            ClassifierKind::Rf => Ok(TrainedModel::Rf(train_random_forest(data, cfg)?)),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label, TrainError> {
        match self {
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::Rf(m) => m.predict(x),
        }
    }

    /// Signed score of a binary model, oriented so positive favors the
    /// higher class (SVM margin; RF fraction of trees voting high).
    pub fn decision_score(&self, x: &[f64]) -> Result<f64, TrainError> {
        match self {
            TrainedModel::Svm(m) => m.decision_score(x),
            TrainedModel::Rf(m) => m.decision_score(x),
        }
    }

    pub fn classes(&self) -> &[Label] {
        match self {
            TrainedModel::Svm(m) => &m.classes,
            TrainedModel::Rf(m) => &m.classes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Validates shared training preconditions; returns the sorted class list.
fn check_training_data(
    data: &crate::labeling::LabeledDataset,
) -> Result<Vec<Label>, TrainError> {
    let classes: Vec<Label> = data.classes();
    if classes.len() < 2 {
        return Err(TrainError::SingleClassDataset);
    }
    for (&label, &count) in &data.class_counts {
        if count < 2 {
            return Err(TrainError::TooFewRowsPerClass(label, count));
        }
    }
    if data.x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(TrainError::NonFiniteFeature);
    }
    Ok(classes)
}

/// Majority vote with ties broken toward the lowest class index.
fn argmax_vote(votes: &[u32]) -> usize {
    let mut best = 0;
    for (i, &v) in votes.iter().enumerate().skip(1) {
        if v > votes[best] {
            best = i;
        }
    }
    best
}
