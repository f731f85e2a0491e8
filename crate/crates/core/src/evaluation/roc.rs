//! ROC curves with trapezoidal AUC. High is the positive class.

use serde::{Deserialize, Serialize};

use crate::labeling::Label;

use super::EvalError;

/// An ROC curve: `(fpr, tpr)` points from `(0,0)` to `(1,1)` produced by a
/// descending threshold sweep (tied scores grouped), plus the trapezoidal
/// area under it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Builds the ROC curve of decision scores against Low/High labels.
pub fn roc_curve(scores: &[f64], labels: &[Label]) -> Result<RocCurve, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if labels.contains(&Label::Medium) {
        return Err(EvalError::NonBinaryLabels);
    }
    let n_pos = labels.iter().filter(|&&l| l == Label::High).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClassLabels);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        // Consume the whole tie group before emitting a point.
        let threshold = scores[order[i]];
        let (prev_tp, prev_fp) = (tp, fp);
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == Label::High {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = (prev_fp as f64 / n_neg as f64, prev_tp as f64 / n_pos as f64);
        let next = (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64);
        auc += (next.0 - prev.0) * (next.1 + prev.1) / 2.0;
        points.push(next);
    }

    Ok(RocCurve { points, auc })
}
