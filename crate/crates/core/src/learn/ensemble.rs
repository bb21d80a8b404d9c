//! Equal-weight majority voting over per-family models.

use crate::error::{Error, Result};

/// Per-row majority vote over each model's argmax class; even splits are
/// resolved by the mean predicted probability. Also returns the mean
/// probabilities, which serve as the ensemble score for AUC.
pub fn majority_vote(probabilities: &[Vec<f64>]) -> Result<(Vec<bool>, Vec<f64>)> {
    if probabilities.len() < 2 {
        return Err(Error::invalid(
            "majority_vote: need at least two models to form an ensemble",
        ));
    }
    let n = probabilities[0].len();
    if probabilities.iter().any(|p| p.len() != n) {
        return Err(Error::invalid(
            "majority_vote: models disagree on prediction-set size",
        ));
    }
    let mut votes = Vec::with_capacity(n);
    let mut mean_scores = Vec::with_capacity(n);
    for i in 0..n {
        let mut positive = 0usize;
        let mut sum = 0.0;
        for p in probabilities {
            if p[i] >= 0.5 {
                positive += 1;
            }
            sum += p[i];
        }
        let mean = sum / probabilities.len() as f64;
        let negative = probabilities.len() - positive;
        let vote = match positive.cmp(&negative) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => mean >= 0.5,
        };
        votes.push(vote);
        mean_scores.push(mean);
    }
    Ok((votes, mean_scores))
}
