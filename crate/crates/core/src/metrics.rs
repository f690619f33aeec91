//! Confusion-matrix statistics and rank-based AUC.

use crate::error::{Error, Result};

/// Counts laid out as actual (rows) x predicted (columns) for the chosen
/// positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_neg: usize,
    pub false_pos: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }
}

pub fn confusion_matrix<T: PartialEq>(
    y_true: &[T],
    y_pred: &[T],
    positive: &T,
) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cm = ConfusionMatrix {
        true_pos: 0,
        false_neg: 0,
        false_pos: 0,
        true_neg: 0,
    };
    for (t, p) in y_true.iter().zip(y_pred.iter()) {
        match (t == positive, p == positive) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_neg += 1,
            (false, true) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// (precision, recall, f1); any 0/0 yields 0 for that quantity.
pub fn precision_recall_f1(cm: &ConfusionMatrix) -> (f64, f64, f64) {
    let precision = ratio(cm.true_pos, cm.true_pos + cm.false_pos);
    let recall = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Geometric mean of sensitivity and specificity.
pub fn gmean(cm: &ConfusionMatrix) -> f64 {
    let tpr = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    let tnr = ratio(cm.true_neg, cm.true_neg + cm.false_pos);
    (tpr * tnr).sqrt()
}

/// The literal square root of TP x TN over raw counts. Not a rate; kept
/// only for auditing against sources that define it this way.
pub fn gmean_raw_counts(cm: &ConfusionMatrix) -> f64 {
    ((cm.true_pos * cm.true_neg) as f64).sqrt()
}

/// Area under the ROC curve via the rank statistic: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties
/// counting one half.
pub fn auc<T: PartialEq>(y_true: &[T], scores: &[f64], positive: &T) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    let n = y_true.len();
    let pos_count = y_true.iter().filter(|t| *t == positive).count();
    let neg_count = n - pos_count;
    if pos_count == 0 || neg_count == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // average ranks over tied score runs (ranks are 1-based)
    let mut rank = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            rank[idx] = avg;
        }
        i = j + 1;
    }

    let rank_sum: f64 = (0..n)
        .filter(|&i| &y_true[i] == positive)
        .map(|i| rank[i])
        .sum();
    let p = pos_count as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * neg_count as f64))
}
