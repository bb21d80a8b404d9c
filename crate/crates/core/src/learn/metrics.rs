//! ROC curve and AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    /// (false positive rate, true positive rate) at every distinct
    /// threshold, from (0, 0) to (1, 1).
    pub roc_points: Vec<(f64, f64)>,
    pub positives: usize,
    pub negatives: usize,
}

/// AUC via the Mann-Whitney rank statistic:
/// (correctly ordered positive-negative pairs + half the ties) / (P * N).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<EvalReport> {
    assert_eq!(scores.len(), labels.len(), "scores and labels must align");
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 {
        return Err(Error::invalid("roc_auc: no positive examples in input"));
    }
    if negatives == 0 {
        return Err(Error::invalid("roc_auc: no negative examples in input"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("roc_auc: non-finite score"));
    }

    // Ascending by score; average ranks across tie groups.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j averaged.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let p = positives as f64;
    let n = negatives as f64;
    let auc = (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);

    // ROC sweep from the highest threshold down, one point per distinct score.
    let mut roc_points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = order.len();
    while i > 0 {
        let mut j = i;
        while j > 0 && scores[order[j - 1]] == scores[order[i - 1]] {
            if labels[order[j - 1]] {
                tp += 1;
            } else {
                fp += 1;
            }
            j -= 1;
        }
        roc_points.push((fp as f64 / n, tp as f64 / p));
        i = j;
    }
    Ok(EvalReport {
        auc,
        roc_points,
        positives,
        negatives,
    })
}
