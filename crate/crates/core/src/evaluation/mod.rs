//! Cross-validated evaluation: fold planning, accuracy, ROC, histograms,
//! and accuracy tables.

mod roc;
mod table;

pub use roc::{roc_curve, RocCurve};
pub use table::{tabulate, AccuracyTable};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{ClassifierKind, TrainConfig, TrainError, TrainedModel};
use crate::features::FeatureMethod;
use crate::labeling::{AffectDimension, Label, LabeledDataset, LabelingConfig, PartitionScheme};
use crate::seed;
use crate::signal::TrialKey;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{n} instances cannot fill {k} folds")]
    TooFewInstances { n: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("fold plan covers {plan} rows, dataset has {data}")]
    PlanMismatch { plan: usize, data: usize },
    #[error("ROC requires both classes among the labels")]
    SingleClassLabels,
    #[error("ROC labels must be binary Low/High")]
    NonBinaryLabels,
    #[error("scores and labels differ in length: {scores} vs {labels}")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("histogram feature index {index} out of range ({n_features} features)")]
    BadFeatureIndex { index: usize, n_features: usize },
    #[error("histogram needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("feature {0} is constant; histogram range is empty")]
    ConstantFeature(usize),
    #[error("histograms are defined for bipartition (Low/High) datasets")]
    NotBipartition,
    #[error("every fold failed to train")]
    AllFoldsFailed,
    #[error(transparent)]
    Train(#[from] TrainError),
}

/// Assignment of dataset rows to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Row index → fold index.
    pub assignment: Vec<usize>,
    /// Classes too small to reach every fold, noted at planning time.
    pub warnings: Vec<String>,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.assignment.len()
    }

    /// Row indices held out by fold `f`.
    pub fn test_rows(&self, f: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&r| self.assignment[r] == f).collect()
    }

    /// Row indices available for training fold `f`.
    pub fn train_rows(&self, f: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&r| self.assignment[r] != f).collect()
    }
}

/// Stratified fold assignment: per class, rows are shuffled with the seeded
/// generator and dealt round-robin, carrying the fold cursor across classes
/// so fold sizes differ by at most one.
pub fn plan_folds(n: usize, k: usize, y: &[Label], seed: u64) -> Result<FoldPlan, EvalError> {
    assert_eq!(n, y.len(), "label vector must cover every row");
    plan_stratified(k, y, seed, None)
}

/// Like [`plan_folds`], but shuffling key-sorted per-class row lists, so the
/// key → fold mapping is invariant to dataset row order.
pub fn plan_folds_keyed(
    data: &LabeledDataset,
    k: usize,
    seed: u64,
) -> Result<FoldPlan, EvalError> {
    plan_stratified(k, &data.y, seed, Some(&data.keys))
}

fn plan_stratified(
    k: usize,
    y: &[Label],
    seed: u64,
    keys: Option<&[TrialKey]>,
) -> Result<FoldPlan, EvalError> {
    let n = y.len();
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if n < k {
        return Err(EvalError::TooFewInstances { n, k });
    }

    let mut classes: Vec<Label> = y.to_vec();
    classes.sort();
    classes.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let mut warnings = Vec::new();
    let mut cursor = 0usize;
    for class in classes {
        let mut rows: Vec<usize> = (0..n).filter(|&r| y[r] == class).collect();
        if let Some(keys) = keys {
            rows.sort_by_key(|&r| keys[r]);
        }
        if rows.len() < k {
            warnings.push(format!(
                "class {class} has {} members for {k} folds; spreading best-effort",
                rows.len()
            ));
        }
        rows.shuffle(&mut rng);
        for row in rows {
            assignment[row] = cursor % k;
            cursor += 1;
        }
    }
    Ok(FoldPlan { k, seed, assignment, warnings })
}

/// Unstratified assignment: one seeded shuffle of the key-sorted rows,
/// dealt round-robin.
pub fn plan_folds_shuffled(
    data: &LabeledDataset,
    k: usize,
    seed: u64,
) -> Result<FoldPlan, EvalError> {
    let n = data.n_rows();
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if n < k {
        return Err(EvalError::TooFewInstances { n, k });
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.sort_by_key(|&r| data.keys[r]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.shuffle(&mut rng);
    let mut assignment = vec![0usize; n];
    for (pos, row) in rows.into_iter().enumerate() {
        assignment[row] = pos % k;
    }
    Ok(FoldPlan { k, seed, assignment, warnings: Vec::new() })
}

/// Grouped fold assignment: whole subjects are dealt to folds round-robin
/// over a seeded shuffle, so no subject spans a train/test boundary.
pub fn plan_folds_by_subject(
    data: &LabeledDataset,
    k: usize,
    seed: u64,
) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let mut subjects: Vec<u32> = data.keys.iter().map(|key| key.subject_id).collect();
    subjects.sort_unstable();
    subjects.dedup();
    if subjects.len() < k {
        return Err(EvalError::TooFewInstances { n: subjects.len(), k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    subjects.shuffle(&mut rng);
    let fold_of = |subject: u32| {
        subjects.iter().position(|&s| s == subject).expect("subject listed") % k
    };
    let assignment = data.keys.iter().map(|key| fold_of(key.subject_id)).collect();
    Ok(FoldPlan { k, seed, assignment, warnings: Vec::new() })
}

/// Everything recorded about one fold of a cross-validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the fold was skipped (single-class training split).
    pub accuracy: Option<f64>,
}

/// Snapshot of everything that determined a cross-validation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfigSnapshot {
    pub method: FeatureMethod,
    pub scheme: PartitionScheme,
    pub dimension: AffectDimension,
    pub classifier: ClassifierKind,
    pub train: TrainConfig,
    pub labeling: LabelingConfig,
    pub folds_k: usize,
    pub fold_seed: u64,
}

/// Per-fold accuracies plus their mean and the config that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub config: CvConfigSnapshot,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub warnings: Vec<String>,
}

/// Per-fold trained models plus the pooled out-of-fold scores that
/// [`cross_validate_detailed`] returns alongside the summary.
pub type CvDetail = (CvResult, Vec<Option<TrainedModel>>, Option<PooledScores>);

/// Out-of-fold decision scores pooled across folds, for ROC construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledScores {
    pub keys: Vec<TrialKey>,
    pub scores: Vec<f64>,
    pub labels: Vec<Label>,
}

/// Cross-validates `data` under `plan`, training one model per fold.
///
/// Standardization and every other training statistic is fitted inside each
/// fold's training split only. Within a fold, train and test rows are
/// ordered by trial key, so results are invariant to dataset row
/// permutations when the plan came from [`plan_folds_keyed`]. A fold whose
/// training split collapses to one class is skipped and recorded.
pub fn cross_validate(
    data: &LabeledDataset,
    cfg: &TrainConfig,
    plan: &FoldPlan,
) -> Result<CvResult, EvalError> {
    let (result, _, _) = cross_validate_detailed(data, cfg, plan)?;
    Ok(result)
}

/// [`cross_validate`] variant that also returns the per-fold models and the
/// pooled out-of-fold decision scores (`None` for non-binary datasets).
pub fn cross_validate_detailed(
    data: &LabeledDataset,
    cfg: &TrainConfig,
    plan: &FoldPlan,
) -> Result<CvDetail, EvalError> {
    if plan.n_rows() != data.n_rows() {
        return Err(EvalError::PlanMismatch { plan: plan.n_rows(), data: data.n_rows() });
    }

    let binary = data.classes() == [Label::Low, Label::High];
    let mut folds = Vec::with_capacity(plan.k);
    let mut models = Vec::with_capacity(plan.k);
    let mut warnings = plan.warnings.clone();
    let mut pooled = PooledScores { keys: Vec::new(), scores: Vec::new(), labels: Vec::new() };

    for f in 0..plan.k {
        let mut train_rows = plan.train_rows(f);
        let mut test_rows = plan.test_rows(f);
        // Canonical in-fold ordering: by trial key, not by row position.
        train_rows.sort_by_key(|&r| data.keys[r]);
        test_rows.sort_by_key(|&r| data.keys[r]);

        let train_split = subset(data, &train_rows);
        if train_split.class_counts.len() < 2 {
            warnings.push(format!("fold {f}: single-class training split, skipped"));
            folds.push(FoldResult { fold: f, n_train: train_rows.len(), n_test: test_rows.len(), accuracy: None });
            models.push(None);
            continue;
        }
        let fold_cfg = TrainConfig { seed: seed::mix(cfg.seed, f as u64), ..*cfg };
        let model = TrainedModel::train(&train_split, &fold_cfg)?;

        let mut correct = 0usize;
        for &r in &test_rows {
            if model.predict(&data.x[r])? == data.y[r] {
                correct += 1;
            }
            if binary {
                pooled.keys.push(data.keys[r]);
                pooled.scores.push(model.decision_score(&data.x[r])?);
                pooled.labels.push(data.y[r]);
            }
        }
        folds.push(FoldResult {
            fold: f,
            n_train: train_rows.len(),
            n_test: test_rows.len(),
            accuracy: Some(correct as f64 / test_rows.len() as f64),
        });
        models.push(Some(model));
    }

    let scored: Vec<f64> = folds.iter().filter_map(|f| f.accuracy).collect();
    if scored.is_empty() {
        return Err(EvalError::AllFoldsFailed);
    }
    let mean_accuracy = scored.iter().sum::<f64>() / scored.len() as f64;

    let result = CvResult {
        config: CvConfigSnapshot {
            method: data.method,
            scheme: data.scheme,
            dimension: data.dimension,
            classifier: cfg.kind,
            train: *cfg,
            labeling: data.labeling,
            folds_k: plan.k,
            fold_seed: plan.seed,
        },
        folds,
        mean_accuracy,
        warnings,
    };
    Ok((result, models, binary.then_some(pooled)))
}

/// Rows of `data` at `rows`, as an owned dataset.
fn subset(data: &LabeledDataset, rows: &[usize]) -> LabeledDataset {
    let mut class_counts = std::collections::BTreeMap::new();
    for &r in rows {
        *class_counts.entry(data.y[r]).or_insert(0usize) += 1;
    }
    LabeledDataset {
        method: data.method,
        dimension: data.dimension,
        scheme: data.scheme,
        labeling: data.labeling,
        layout: data.layout.clone(),
        x: rows.iter().map(|&r| data.x[r].clone()).collect(),
        y: rows.iter().map(|&r| data.y[r]).collect(),
        keys: rows.iter().map(|&r| data.keys[r]).collect(),
        class_counts,
        excluded: 0,
    }
}

/// Returns a copy of `data` with labels permuted by a seeded shuffle, for
/// permutation-null baselines.
pub fn permute_labels(data: &LabeledDataset, seed: u64) -> LabeledDataset {
    let mut permuted = data.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    permuted.y.shuffle(&mut rng);
    permuted
}

/// Class-conditional histogram of one feature over shared equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPair {
    pub feature_index: usize,
    pub feature_name: String,
    /// `bins + 1` strictly increasing edges spanning the pooled range.
    pub edges: Vec<f64>,
    pub counts_low: Vec<u64>,
    pub counts_high: Vec<u64>,
}

/// Histograms one feature of a bipartition dataset: shared equal-width edges
/// over the pooled [min, max]; the top edge is inclusive.
pub fn feature_histograms(
    data: &LabeledDataset,
    feature_index: usize,
    bins: usize,
) -> Result<HistogramPair, EvalError> {
    if data.classes() != [Label::Low, Label::High] {
        return Err(EvalError::NotBipartition);
    }
    if bins < 2 {
        return Err(EvalError::TooFewBins(bins));
    }
    if feature_index >= data.n_features() {
        return Err(EvalError::BadFeatureIndex { index: feature_index, n_features: data.n_features() });
    }

    let values: Vec<f64> = data.x.iter().map(|row| row[feature_index]).collect();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(EvalError::ConstantFeature(feature_index));
    }

    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| min + width * i as f64).collect();
    let mut counts_low = vec![0u64; bins];
    let mut counts_high = vec![0u64; bins];
    for (&v, &label) in values.iter().zip(&data.y) {
        let bin = (((v - min) / width) as usize).min(bins - 1);
        match label {
            Label::Low => counts_low[bin] += 1,
            Label::High => counts_high[bin] += 1,
            Label::Medium => unreachable!("bipartition checked above"),
        }
    }

    let probe = crate::features::FeatureVector {
        method: data.method,
        values: vec![0.0; data.layout.len()],
        layout: data.layout.clone(),
    };
    Ok(HistogramPair {
        feature_index,
        feature_name: probe.column_names()[feature_index].clone(),
        edges,
        counts_low,
        counts_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::test_data::{dataset_from, gaussian_clusters};

    #[test]
    fn balanced_plan_splits_classes_evenly() {
        let y: Vec<Label> = (0..100)
            .map(|i| if i % 2 == 0 { Label::Low } else { Label::High })
            .collect();
        let plan = plan_folds(100, 10, &y, 7).unwrap();
        for f in 0..10 {
            let rows = plan.test_rows(f);
            assert_eq!(rows.len(), 10);
            let low = rows.iter().filter(|&&r| y[r] == Label::Low).count();
            assert_eq!(low, 5);
        }
    }

    #[test]
    fn singleton_folds_and_too_few_instances() {
        let y: Vec<Label> = (0..10)
            .map(|i| if i % 2 == 0 { Label::Low } else { Label::High })
            .collect();
        let plan = plan_folds(10, 10, &y, 1).unwrap();
        for f in 0..10 {
            assert_eq!(plan.test_rows(f).len(), 1);
        }
        assert!(!plan.warnings.is_empty());

        assert!(matches!(
            plan_folds(5, 10, &y[..5], 1),
            Err(EvalError::TooFewInstances { .. })
        ));
    }

    #[test]
    fn fold_sizes_differ_by_at_most_one() {
        let y: Vec<Label> = (0..47)
            .map(|i| if i % 3 == 0 { Label::Low } else { Label::High })
            .collect();
        let plan = plan_folds(47, 10, &y, 3).unwrap();
        let sizes: Vec<usize> = (0..10).map(|f| plan.test_rows(f).len()).collect();
        let min = sizes.iter().min().unwrap();
        let max = sizes.iter().max().unwrap();
        assert!(max - min <= 1, "sizes {sizes:?}");
    }

    #[test]
    fn memorizing_forest_scores_perfectly_on_duplicated_folds() {
        // Two folds holding identical copies of the data; an unbootstrapped
        // single tree memorizes the training fold and scores 1.0 on the
        // identical held-out fold.
        let base = gaussian_clusters(20, 2, 1.5);
        let mut x = base.x.clone();
        x.extend(base.x.iter().cloned());
        let mut y = base.y.clone();
        y.extend(base.y.iter().copied());
        let data = dataset_from(x, y);
        let assignment: Vec<usize> = (0..data.n_rows()).map(|r| r / base.n_rows()).collect();
        let plan = FoldPlan { k: 2, seed: 0, assignment, warnings: Vec::new() };

        let cfg = TrainConfig {
            n_trees: 1,
            bootstrap: false,
            mtry: Some(2),
            ..TrainConfig::new(ClassifierKind::Rf)
        };
        let result = cross_validate(&data, &cfg, &plan).unwrap();
        assert_eq!(result.mean_accuracy, 1.0);
    }

    #[test]
    fn plan_mismatch_is_rejected() {
        let data = gaussian_clusters(20, 2, 1.5);
        let plan = FoldPlan { k: 2, seed: 0, assignment: vec![0; 10], warnings: Vec::new() };
        assert!(matches!(
            cross_validate(&data, &TrainConfig::new(ClassifierKind::Rf), &plan),
            Err(EvalError::PlanMismatch { .. })
        ));
    }

    #[test]
    fn subject_grouped_folds_keep_subjects_whole() {
        let mut data = gaussian_clusters(40, 5, 2.0);
        for (i, key) in data.keys.iter_mut().enumerate() {
            key.subject_id = (i as u32 % 8) + 1;
            key.trial_id = (i as u32 / 8) + 1;
        }
        let plan = plan_folds_by_subject(&data, 4, 9).unwrap();
        for (row, key) in data.keys.iter().enumerate() {
            for (other, other_key) in data.keys.iter().enumerate() {
                if key.subject_id == other_key.subject_id {
                    assert_eq!(plan.assignment[row], plan.assignment[other]);
                }
            }
        }
    }

    #[test]
    fn histogram_counts_sum_to_class_sizes() {
        let data = gaussian_clusters(50, 4, 3.0);
        let hist = feature_histograms(&data, 0, 8).unwrap();
        let low: u64 = hist.counts_low.iter().sum();
        let high: u64 = hist.counts_high.iter().sum();
        assert_eq!(low as usize, data.class_counts[&Label::Low]);
        assert_eq!(high as usize, data.class_counts[&Label::High]);
        assert_eq!(hist.edges.len(), 9);
        assert!(hist.edges.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn disjoint_classes_split_cleanly_into_two_bins() {
        let x: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![if i % 2 == 0 { 0.0 } else { 1.0 }, i as f64])
            .collect();
        let y: Vec<Label> = (0..10)
            .map(|i| if i % 2 == 0 { Label::Low } else { Label::High })
            .collect();
        let data = dataset_from(x, y);
        let hist = feature_histograms(&data, 0, 2).unwrap();
        assert_eq!(hist.counts_low, vec![5, 0]);
        assert_eq!(hist.counts_high, vec![0, 5]);

        let constant: Vec<Vec<f64>> = (0..10).map(|i| vec![2.5, i as f64]).collect();
        let y: Vec<Label> = (0..10)
            .map(|i| if i % 2 == 0 { Label::Low } else { Label::High })
            .collect();
        let data = dataset_from(constant, y);
        assert!(matches!(
            feature_histograms(&data, 0, 2),
            Err(EvalError::ConstantFeature(0))
        ));
    }
}
