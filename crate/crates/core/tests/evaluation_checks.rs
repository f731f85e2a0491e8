//! Cross-validation hygiene: leakage, permutation nulls, ROC identities,
//! and row-order invariance.

mod common;

use affekt::classifiers::{ClassifierKind, TrainConfig};
use affekt::evaluation::{
    cross_validate, cross_validate_detailed, feature_histograms, permute_labels,
    plan_folds_keyed, roc_curve,
};
use affekt::labeling::Label;
use affekt::signal::TrialKey;

use common::{dataset_from, gaussian_clusters};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn separable_task_cross_validates_above_95_percent() {
    let data = gaussian_clusters(100, 4, 7, 4.0);
    let plan = plan_folds_keyed(&data, 10, 11).unwrap();
    let cfg = TrainConfig { n_trees: 100, ..TrainConfig::new(ClassifierKind::Rf) };
    let result = cross_validate(&data, &cfg, &plan).unwrap();
    assert!(result.mean_accuracy >= 0.95, "mean {}", result.mean_accuracy);
}

#[test]
fn corrupting_held_out_rows_leaves_trained_models_untouched() {
    let data = gaussian_clusters(60, 3, 21, 2.0);
    let plan = plan_folds_keyed(&data, 5, 3).unwrap();
    let cfg = TrainConfig { n_trees: 20, ..TrainConfig::new(ClassifierKind::Rf) };

    let (_, models_before, _) = cross_validate_detailed(&data, &cfg, &plan).unwrap();

    // Corrupt exactly the rows fold 0 holds out.
    let mut corrupted = data.clone();
    for r in plan.test_rows(0) {
        for v in corrupted.x[r].iter_mut() {
            *v *= 1e6;
        }
    }
    let (_, models_after, _) = cross_validate_detailed(&corrupted, &cfg, &plan).unwrap();

    let before = models_before[0].as_ref().unwrap().to_json();
    let after = models_after[0].as_ref().unwrap().to_json();
    assert_eq!(before, after);

    // The same holds for the SVM path, which fits a standardizer per fold.
    let svm_cfg = TrainConfig::new(ClassifierKind::Svm);
    let (_, svm_before, _) = cross_validate_detailed(&data, &svm_cfg, &plan).unwrap();
    let (_, svm_after, _) = cross_validate_detailed(&corrupted, &svm_cfg, &plan).unwrap();
    assert_eq!(
        svm_before[0].as_ref().unwrap().to_json(),
        svm_after[0].as_ref().unwrap().to_json()
    );
}

#[test]
fn cv_result_is_invariant_to_row_permutation() {
    let data = gaussian_clusters(40, 3, 17, 2.0);
    let plan = plan_folds_keyed(&data, 5, 9).unwrap();
    let cfg = TrainConfig { n_trees: 16, ..TrainConfig::new(ClassifierKind::Rf) };
    let base = cross_validate(&data, &cfg, &plan).unwrap();

    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    order.shuffle(&mut rng);
    let mut shuffled = dataset_from(
        order.iter().map(|&r| data.x[r].clone()).collect(),
        order.iter().map(|&r| data.y[r]).collect(),
    );
    shuffled.keys = order.iter().map(|&r| data.keys[r]).collect();

    let shuffled_plan = plan_folds_keyed(&shuffled, 5, 9).unwrap();
    let got = cross_validate(&shuffled, &cfg, &shuffled_plan).unwrap();
    assert_eq!(got.mean_accuracy, base.mean_accuracy);
    assert_eq!(got.folds, base.folds);
}

#[test]
fn single_class_training_split_skips_the_fold() {
    // 3 Low rows all held out by fold 0: training fold 0 sees only High.
    let mut data = gaussian_clusters(20, 2, 2, 2.0);
    for (i, label) in data.y.iter_mut().enumerate() {
        *label = if i < 3 { Label::Low } else { Label::High };
    }
    data.class_counts = [(Label::Low, 3), (Label::High, 17)].into_iter().collect();
    let assignment: Vec<usize> = (0..20).map(|r| if r < 3 { 0 } else { 1 + r % 4 }).collect();
    let plan = affekt::evaluation::FoldPlan { k: 5, seed: 0, assignment, warnings: Vec::new() };

    let cfg = TrainConfig { n_trees: 8, ..TrainConfig::new(ClassifierKind::Rf) };
    let result = cross_validate(&data, &cfg, &plan).unwrap();
    assert_eq!(result.folds[0].accuracy, None);
    assert!(result.folds[1..].iter().all(|f| f.accuracy.is_some()));
    assert!(result.warnings.iter().any(|w| w.contains("fold 0")));
}

#[test]
fn shuffled_plan_balances_fold_sizes() {
    let data = gaussian_clusters(47, 2, 8, 1.0);
    let plan = affekt::evaluation::plan_folds_shuffled(&data, 10, 3).unwrap();
    let sizes: Vec<usize> = (0..10).map(|f| plan.test_rows(f).len()).collect();
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    assert_eq!(sizes.iter().sum::<usize>(), 47);
}

#[test]
fn permuted_labels_score_at_chance() {
    let data = gaussian_clusters(100, 4, 7, 4.0);
    let cfg = TrainConfig { n_trees: 50, ..TrainConfig::new(ClassifierKind::Rf) };
    let mut accuracies = Vec::new();
    for seed in 0..20u64 {
        let null = permute_labels(&data, 1000 + seed);
        let plan = plan_folds_keyed(&null, 10, seed).unwrap();
        accuracies.push(cross_validate(&null, &cfg, &plan).unwrap().mean_accuracy);
    }
    let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    // Binomial noise: σ ≈ sqrt(0.25 / (n · runs)).
    let sigma = (0.25f64 / (100.0 * 20.0)).sqrt();
    assert!(
        (mean - 0.5).abs() <= 3.0 * sigma + 0.02,
        "null accuracy {mean} strays from chance"
    );
}

#[test]
fn auc_equals_normalized_mann_whitney_u() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let n = 60;
        // Distinct scores: shuffle a strictly increasing sequence.
        let mut scores: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
        scores.shuffle(&mut rng);
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.random::<bool>() { Label::High } else { Label::Low })
            .collect();
        if !labels.contains(&Label::High) || !labels.contains(&Label::Low) {
            continue;
        }

        let auc = roc_curve(&scores, &labels).unwrap().auc;
        let mut u = 0.0f64;
        let mut pairs = 0.0f64;
        for (sp, lp) in scores.iter().zip(&labels) {
            if *lp != Label::High {
                continue;
            }
            for (sn, ln) in scores.iter().zip(&labels) {
                if *ln != Label::Low {
                    continue;
                }
                pairs += 1.0;
                if sp > sn {
                    u += 1.0;
                }
            }
        }
        assert!((auc - u / pairs).abs() <= 1e-12, "auc {auc} vs U {}", u / pairs);
    }
}

#[test]
fn random_scores_give_chance_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1000;
    let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let labels: Vec<Label> = (0..n)
        .map(|i| if i % 2 == 0 { Label::High } else { Label::Low })
        .collect();
    let auc = roc_curve(&scores, &labels).unwrap().auc;
    assert!((0.45..=0.55).contains(&auc), "auc {auc}");
}

#[test]
fn identical_class_distributions_pass_a_chi_square_check() {
    // Both classes drawn from the same distribution; the per-bin counts
    // should differ only by sampling noise.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 400;
    let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>()]).collect();
    let y: Vec<Label> = (0..n)
        .map(|i| if i % 2 == 0 { Label::Low } else { Label::High })
        .collect();
    let mut data = dataset_from(x, y);
    data.keys = (0..n as u32).map(|i| TrialKey::new(1, i + 1)).collect();

    let bins = 10;
    let hist = feature_histograms(&data, 0, bins).unwrap();
    let mut chi2 = 0.0;
    for (lo, hi) in hist.counts_low.iter().zip(&hist.counts_high) {
        let total = (lo + hi) as f64;
        if total == 0.0 {
            continue;
        }
        let expected = total / 2.0;
        chi2 += (*lo as f64 - expected).powi(2) / expected
            + (*hi as f64 - expected).powi(2) / expected;
    }
    // χ²(9) critical value at p = 0.01.
    assert!(chi2 <= 21.666, "chi2 {chi2}");
}
