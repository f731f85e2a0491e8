//! Linear C-SVM trained by dual coordinate descent.
//!
//! Each class pair solves the L1-loss soft-margin dual
//!
//! ```text
//! min_α  ½ αᵀQα − Σαᵢ,   0 ≤ αᵢ ≤ C,   Q = (yᵢyⱼ xᵢ·xⱼ)
//! ```
//!
//! with exact single-coordinate updates over a seeded random permutation per
//! epoch, maintaining `w = Σ αᵢyᵢxᵢ`. The bias rides along as an appended
//! constant feature. Training stops when the relative duality gap falls
//! under the configured tolerance or the epoch cap is hit (the model is
//! still returned, flagged unconverged). Inputs are standardized with
//! statistics fitted on the training rows only.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::labeling::{Label, LabeledDataset};
use crate::seed;

use super::{argmax_vote, check_training_data, Standardizer, TrainConfig, TrainError};

/// One trained one-vs-one boundary. `weights` excludes the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseBoundary {
    pub class_lo: Label,
    pub class_hi: Label,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub epochs: usize,
    pub dual_objective: f64,
    pub primal_objective: f64,
}

impl PairwiseBoundary {
    /// Signed decision value on a standardized input; positive favors
    /// `class_hi`.
    fn decision(&self, x_std: &[f64]) -> f64 {
        dot(&self.weights, x_std) + self.bias
    }
}

/// Linear SVM over ≥2 classes, one boundary per class pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub classes: Vec<Label>,
    pub c: f64,
    pub standardizer: Standardizer,
    pub pairs: Vec<PairwiseBoundary>,
    pub n_features: usize,
}

impl LinearSvmModel {
    pub fn predict(&self, x: &[f64]) -> Result<Label, TrainError> {
        if x.len() != self.n_features {
            return Err(TrainError::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        let x_std = self.standardizer.transform(x);
        let mut votes = vec![0u32; self.classes.len()];
        for pair in &self.pairs {
            let winner = if pair.decision(&x_std) > 0.0 { pair.class_hi } else { pair.class_lo };
            let idx = self.classes.iter().position(|&c| c == winner).expect("class in list");
            votes[idx] += 1;
        }
        Ok(self.classes[argmax_vote(&votes)])
    }

    /// Signed margin of a binary model; positive favors the higher class.
    pub fn decision_score(&self, x: &[f64]) -> Result<f64, TrainError> {
        if self.classes.len() != 2 {
            return Err(TrainError::NotBinaryModel(self.classes.len()));
        }
        if x.len() != self.n_features {
            return Err(TrainError::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        Ok(self.pairs[0].decision(&self.standardizer.transform(x)))
    }

    /// True when every pairwise solve reached its duality-gap tolerance.
    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }
}

/// Trains a linear SVM on every class pair of the dataset.
pub fn train_linear_svm(
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<LinearSvmModel, TrainError> {
    let classes = check_training_data(data)?;
    let standardizer = Standardizer::fit(&data.x)?;
    let rows: Vec<Vec<f64>> = data.x.iter().map(|r| standardizer.transform(r)).collect();

    let mut pairs = Vec::new();
    for (ai, &a) in classes.iter().enumerate() {
        for &b in classes.iter().skip(ai + 1) {
            let mut pair_rows = Vec::new();
            let mut pair_y = Vec::new();
            for (row, &label) in rows.iter().zip(&data.y) {
                if label == a || label == b {
                    // Augmented bias feature; +1 is the higher class.
                    let mut x = row.clone();
                    x.push(1.0);
                    pair_rows.push(x);
                    pair_y.push(if label == b { 1.0 } else { -1.0 });
                }
            }
            let pair_seed = seed::mix(cfg.seed, pairs.len() as u64);
            let solve = solve_pair(&pair_rows, &pair_y, cfg, pair_seed);
            let (bias, weights) = match solve.w.split_last() {
                Some((&bias, weights)) => (bias, weights.to_vec()),
                None => (0.0, Vec::new()),
            };
            pairs.push(PairwiseBoundary {
                class_lo: a,
                class_hi: b,
                weights,
                bias,
                converged: solve.converged,
                epochs: solve.epochs,
                dual_objective: solve.dual,
                primal_objective: solve.primal,
            });
        }
    }

    Ok(LinearSvmModel {
        classes,
        c: cfg.c,
        standardizer,
        pairs,
        n_features: data.n_features(),
    })
}

struct PairSolve {
    w: Vec<f64>,
    converged: bool,
    epochs: usize,
    dual: f64,
    primal: f64,
}

fn solve_pair(rows: &[Vec<f64>], y: &[f64], cfg: &TrainConfig, pair_seed: u64) -> PairSolve {
    let n = rows.len();
    let d = rows[0].len();
    let c = cfg.c;
    let q_diag: Vec<f64> = rows.iter().map(|r| dot(r, r)).collect();

    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; d];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);

    let mut prev_dual = f64::NEG_INFINITY;
    let mut converged = false;
    let mut epochs = 0;
    let mut dual = 0.0;
    let mut primal = 0.0;
    for epoch in 0..cfg.max_epochs {
        epochs = epoch + 1;
        order.shuffle(&mut rng);
        for &i in &order {
            if q_diag[i] == 0.0 {
                continue;
            }
            let g = y[i] * dot(&w, &rows[i]) - 1.0;
            let projected = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            if projected == 0.0 {
                continue;
            }
            let next = (alpha[i] - g / q_diag[i]).clamp(0.0, c);
            let delta = next - alpha[i];
            if delta != 0.0 {
                for (wj, xj) in w.iter_mut().zip(&rows[i]) {
                    *wj += delta * y[i] * xj;
                }
                alpha[i] = next;
            }
        }

        let w_norm_sq = dot(&w, &w);
        dual = alpha.iter().sum::<f64>() - 0.5 * w_norm_sq;
        let hinge: f64 = rows
            .iter()
            .zip(y)
            .map(|(r, &yi)| (1.0 - yi * dot(&w, r)).max(0.0))
            .sum();
        primal = 0.5 * w_norm_sq + c * hinge;

        // Exact coordinate minimization never decreases the dual.
        assert!(
            dual >= prev_dual - 1e-9 * (1.0 + prev_dual.abs()),
            "dual objective decreased: {prev_dual} -> {dual}"
        );
        prev_dual = dual;

        if primal - dual <= cfg.tolerance * primal.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    PairSolve { w, converged, epochs, dual, primal }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::test_data::{gaussian_clusters, xor_dataset};
    use crate::classifiers::ClassifierKind;

    fn training_accuracy(model: &LinearSvmModel, data: &LabeledDataset) -> f64 {
        let correct = data
            .x
            .iter()
            .zip(&data.y)
            .filter(|(x, &y)| model.predict(x).unwrap() == y)
            .count();
        correct as f64 / data.n_rows() as f64
    }

    #[test]
    fn separable_clusters_reach_full_training_accuracy() {
        let data = gaussian_clusters(200, 11, 8.0);
        let model = train_linear_svm(&data, &TrainConfig::new(ClassifierKind::Svm)).unwrap();
        assert!(model.converged());
        assert_eq!(training_accuracy(&model, &data), 1.0);
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let data = xor_dataset(200, 13);
        let model = train_linear_svm(&data, &TrainConfig::new(ClassifierKind::Svm)).unwrap();
        let acc = training_accuracy(&model, &data);
        assert!(acc <= 0.60, "linear SVM reached {acc} on XOR data");
    }

    #[test]
    fn single_class_is_rejected() {
        let mut data = gaussian_clusters(20, 1, 4.0);
        data.y = vec![Label::Low; data.y.len()];
        data.class_counts = [(Label::Low, data.y.len())].into_iter().collect();
        assert!(matches!(
            train_linear_svm(&data, &TrainConfig::new(ClassifierKind::Svm)),
            Err(TrainError::SingleClassDataset)
        ));
    }

    #[test]
    fn decision_score_sign_matches_predictions() {
        let data = gaussian_clusters(100, 5, 6.0);
        let model = train_linear_svm(&data, &TrainConfig::new(ClassifierKind::Svm)).unwrap();
        for x in &data.x {
            let score = model.decision_score(x).unwrap();
            let label = model.predict(x).unwrap();
            assert_eq!(label == Label::High, score > 0.0);
        }
        assert!(model.decision_score(&[1.0]).is_err());
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let data = gaussian_clusters(40, 5, 6.0);
        let model = train_linear_svm(&data, &TrainConfig::new(ClassifierKind::Svm)).unwrap();
        assert!(matches!(
            model.predict(&[0.0, 0.0, 0.0]),
            Err(TrainError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hand_built_boundaries_vote_and_score_as_documented() {
        use crate::classifiers::Standardizer;
        let pair = |lo: Label, hi: Label, w: Vec<f64>, b: f64| PairwiseBoundary {
            class_lo: lo,
            class_hi: hi,
            weights: w,
            bias: b,
            converged: true,
            epochs: 1,
            dual_objective: 0.0,
            primal_objective: 0.0,
        };
        let identity = Standardizer { mean: vec![0.0], std: vec![1.0] };

        // Three classes; x sits on the High side of both High boundaries.
        let model = LinearSvmModel {
            classes: vec![Label::Low, Label::Medium, Label::High],
            c: 1.0,
            standardizer: identity.clone(),
            pairs: vec![
                pair(Label::Low, Label::Medium, vec![-1.0], 0.0),
                pair(Label::Low, Label::High, vec![1.0], 0.0),
                pair(Label::Medium, Label::High, vec![1.0], 0.0),
            ],
            n_features: 1,
        };
        assert_eq!(model.predict(&[2.0]).unwrap(), Label::High);

        // Binary model: a point exactly on the boundary scores 0.0.
        let binary = LinearSvmModel {
            classes: vec![Label::Low, Label::High],
            c: 1.0,
            standardizer: identity,
            pairs: vec![pair(Label::Low, Label::High, vec![2.0], -4.0)],
            n_features: 1,
        };
        assert_eq!(binary.decision_score(&[2.0]).unwrap(), 0.0);
        // The zero-score tie votes for the lower class.
        assert_eq!(binary.predict(&[2.0]).unwrap(), Label::Low);
    }
}
