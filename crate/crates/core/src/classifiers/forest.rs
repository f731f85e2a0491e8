//! Random Forest of CART trees (Gini splits, bootstrap resampling,
//! per-node feature subsampling).
//!
//! Tree `t` draws all of its randomness from a ChaCha stream seeded by
//! `(master seed, t)`, so the forest is bit-identical however tree
//! construction is scheduled. Trees grow until nodes are pure, smaller than
//! `2·min_leaf`, or no split improves Gini impurity. Split thresholds sit on
//! the largest value routed left (`x ≤ threshold`), which keeps partitioning
//! exact in floating point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::labeling::{Label, LabeledDataset};
use crate::seed;

use super::{argmax_vote, check_training_data, TrainConfig, TrainError};

/// Flat tree encoding: `feature == -1` marks a leaf carrying per-class
/// counts; internal nodes route `x[feature] ≤ threshold` to `left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: i32,
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub classes: Vec<Label>,
    pub trees: Vec<Vec<TreeNode>>,
    pub n_trees: usize,
    pub mtry: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub master_seed: u64,
    pub n_features: usize,
    /// Accuracy over rows with at least one out-of-bag vote; `None` without
    /// bootstrap.
    pub oob_accuracy: Option<f64>,
}

impl RandomForestModel {
    pub fn predict(&self, x: &[f64]) -> Result<Label, TrainError> {
        if x.len() != self.n_features {
            return Err(TrainError::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        let votes = self.tree_votes(x);
        Ok(self.classes[argmax_vote(&votes)])
    }

    /// Fraction of trees voting the higher class of a binary model.
    pub fn decision_score(&self, x: &[f64]) -> Result<f64, TrainError> {
        if self.classes.len() != 2 {
            return Err(TrainError::NotBinaryModel(self.classes.len()));
        }
        if x.len() != self.n_features {
            return Err(TrainError::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        let votes = self.tree_votes(x);
        Ok(votes[1] as f64 / self.trees.len() as f64)
    }

    fn tree_votes(&self, x: &[f64]) -> Vec<u32> {
        let mut votes = vec![0u32; self.classes.len()];
        for tree in &self.trees {
            votes[tree_leaf_class(tree, x)] += 1;
        }
        votes
    }
}

/// Class index a single tree assigns to `x`.
fn tree_leaf_class(tree: &[TreeNode], x: &[f64]) -> usize {
    let mut node = &tree[0];
    while node.feature >= 0 {
        node = if x[node.feature as usize] <= node.threshold {
            &tree[node.left as usize]
        } else {
            &tree[node.right as usize]
        };
    }
    argmax_vote(&node.counts)
}

/// Trains a forest of `cfg.n_trees` CART trees.
pub fn train_random_forest(
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<RandomForestModel, TrainError> {
    let classes = check_training_data(data)?;
    let n = data.n_rows();
    let d = data.n_features();
    let mtry = cfg.mtry.unwrap_or_else(|| (d as f64).sqrt().floor() as usize).clamp(1, d);
    let class_index: Vec<usize> = data
        .y
        .iter()
        .map(|label| classes.iter().position(|c| c == label).expect("label in class list"))
        .collect();

    let grown: Vec<(Vec<TreeNode>, Vec<usize>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(cfg.seed, t as u64));
            let (rows, oob) = if cfg.bootstrap {
                let mut in_bag = vec![false; n];
                let rows: Vec<usize> = (0..n)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect();
                let oob = (0..n).filter(|&i| !in_bag[i]).collect();
                (rows, oob)
            } else {
                ((0..n).collect(), Vec::new())
            };
            let mut builder = TreeBuilder {
                x: &data.x,
                class_index: &class_index,
                n_classes: classes.len(),
                mtry,
                min_leaf: cfg.min_leaf.max(1),
                rng,
                nodes: Vec::new(),
            };
            builder.grow(rows);
            (builder.nodes, oob)
        })
        .collect();

    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut oob_votes = vec![vec![0u32; classes.len()]; n];
    let mut any_oob = false;
    for (tree, oob) in grown {
        for &row in &oob {
            any_oob = true;
            oob_votes[row][tree_leaf_class(&tree, &data.x[row])] += 1;
        }
        trees.push(tree);
    }

    let oob_accuracy = if cfg.bootstrap && any_oob {
        let mut correct = 0usize;
        let mut counted = 0usize;
        for (row, votes) in oob_votes.iter().enumerate() {
            if votes.iter().any(|&v| v > 0) {
                counted += 1;
                if argmax_vote(votes) == class_index[row] {
                    correct += 1;
                }
            }
        }
        Some(correct as f64 / counted as f64)
    } else {
        None
    };

    Ok(RandomForestModel {
        classes,
        trees,
        n_trees: cfg.n_trees,
        mtry,
        min_leaf: cfg.min_leaf.max(1),
        bootstrap: cfg.bootstrap,
        master_seed: cfg.seed,
        n_features: d,
        oob_accuracy,
    })
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    class_index: &'a [usize],
    n_classes: usize,
    mtry: usize,
    min_leaf: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>) -> u32 {
        let counts = self.count_classes(&rows);
        let node_gini = gini(&counts, rows.len());
        if node_gini == 0.0 || rows.len() < 2 * self.min_leaf {
            return self.push_leaf(counts);
        }

        match self.best_split(&rows, node_gini) {
            None => self.push_leaf(counts),
            Some((feature, threshold)) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| self.x[r][feature] <= threshold);
                // Reserve this node's slot before descending.
                let index = self.nodes.len() as u32;
                self.nodes.push(TreeNode {
                    feature: feature as i32,
                    threshold,
                    left: 0,
                    right: 0,
                    counts: Vec::new(),
                });
                let left = self.grow(left_rows);
                let right = self.grow(right_rows);
                self.nodes[index as usize].left = left;
                self.nodes[index as usize].right = right;
                index
            }
        }
    }

    fn push_leaf(&mut self, counts: Vec<u32>) -> u32 {
        let index = self.nodes.len() as u32;
        self.nodes.push(TreeNode { feature: -1, threshold: 0.0, left: 0, right: 0, counts });
        index
    }

    fn count_classes(&self, rows: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &r in rows {
            counts[self.class_index[r]] += 1;
        }
        counts
    }

    /// Best Gini split over `mtry` features sampled without replacement.
    fn best_split(&mut self, rows: &[usize], node_gini: f64) -> Option<(usize, f64)> {
        let d = self.x[0].len();
        let n = rows.len() as f64;

        // Partial Fisher-Yates for the feature sample.
        let mut features: Vec<usize> = (0..d).collect();
        for i in 0..self.mtry.min(d) {
            let j = self.rng.random_range(i..d);
            features.swap(i, j);
        }

        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for &f in &features[..self.mtry.min(d)] {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.x[r][f], self.class_index[r])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_counts = vec![0u32; self.n_classes];
            let mut right_counts = self.count_classes(rows);
            for i in 0..sorted.len() - 1 {
                left_counts[sorted[i].1] += 1;
                right_counts[sorted[i].1] -= 1;
                let nl = i + 1;
                let nr = sorted.len() - nl;
                if nl < self.min_leaf || nr < self.min_leaf || sorted[i].0 == sorted[i + 1].0 {
                    continue;
                }
                let child_gini = (nl as f64 * gini(&left_counts, nl)
                    + nr as f64 * gini(&right_counts, nr))
                    / n;
                let gain = node_gini - child_gini;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, sorted[i].0));
                }
            }
        }
        best.map(|(_, f, thr)| (f, thr))
    }
}

fn gini(counts: &[u32], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n) * (c as f64 / n)).sum::<f64>()
}
