//! Local explanations for bag-of-words text models.
//!
//! Perturbations are random subsets of the review's distinct in-vocabulary
//! tokens (each kept with probability one half); the model scores the
//! masked bag-of-words, samples are weighted by cosine proximity to the
//! full text, and a weighted ridge fit yields signed per-token weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ridge::weighted_ridge;
use crate::error::{Error, Result};
use crate::learn::{Matrix, ProbClassifier};
use crate::text::{preprocess, Vocabulary};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TextExplainerConfig {
    pub top_k: usize,
    pub num_samples: usize,
    pub kernel_width: f64,
    pub ridge_alpha: f64,
    pub seed: u64,
}

impl Default for TextExplainerConfig {
    fn default() -> Self {
        TextExplainerConfig {
            top_k: 10,
            num_samples: 3000,
            kernel_width: 0.25,
            ridge_alpha: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WordWeight {
    pub token: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TextExplanation {
    pub review_id: String,
    pub predicted_survived: bool,
    pub probability: f64,
    pub word_weights: Vec<WordWeight>,
    pub local_fit_r2: f64,
    pub kernel_width: f64,
    pub num_samples: usize,
    pub seed: u64,
}

/// Explain a BOW model's prediction for one review text.
pub fn explain_text(
    model: &dyn ProbClassifier,
    vocab: &Vocabulary,
    review_id: &str,
    text: &str,
    config: &TextExplainerConfig,
) -> Result<TextExplanation> {
    let tokens = preprocess(text);
    // Distinct in-vocabulary tokens in first-occurrence order, with their
    // occurrence counts in the full text.
    let mut distinct: Vec<(String, usize, u32)> = Vec::new(); // (token, vocab idx, count)
    for t in &tokens {
        if let Some(vi) = vocab.index_of(t) {
            match distinct.iter_mut().find(|(d, _, _)| d == t) {
                Some(entry) => entry.2 += 1,
                None => distinct.push((t.clone(), vi, 1)),
            }
        }
    }
    if distinct.is_empty() {
        return Err(Error::invalid(format!(
            "unexplainable input: review {review_id} has no in-vocabulary tokens"
        )));
    }

    let f = distinct.len();
    let n = config.num_samples.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut bow_rows = Matrix::zeros(0, vocab.len());
    let mut masks = Matrix::zeros(0, f);
    let full_row = |mask: &[f64]| -> Vec<f64> {
        let mut row = vec![0.0; vocab.len()];
        for ((_, vi, count), &keep) in distinct.iter().zip(mask) {
            if keep == 1.0 {
                row[*vi] += f64::from(*count);
            }
        }
        row
    };
    let all_on = vec![1.0; f];
    bow_rows.push_row(&full_row(&all_on));
    masks.push_row(&all_on);
    let mut mask_buf = vec![1.0; f];
    for _ in 1..n {
        for m in &mut mask_buf {
            *m = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        }
        bow_rows.push_row(&full_row(&mask_buf));
        masks.push_row(&mask_buf);
    }

    let y = model.predict_rows(&bow_rows);
    let weights: Vec<f64> = masks
        .iter_rows()
        .map(|mask| {
            let kept: f64 = mask.iter().sum();
            // Cosine similarity between a binary mask and the all-ones
            // vector is sqrt(kept / F).
            let d = 1.0 - (kept / f as f64).sqrt();
            (-(d * d) / (config.kernel_width * config.kernel_width)).exp()
        })
        .collect();

    let fit = weighted_ridge(&masks, &y, &weights, config.ridge_alpha)?;

    let mut ranked: Vec<(usize, f64)> = fit
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, c))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .unwrap()
            .then(a.0.cmp(&b.0))
    });
    let word_weights: Vec<WordWeight> = ranked
        .into_iter()
        .take(config.top_k)
        .map(|(i, weight)| WordWeight {
            token: distinct[i].0.clone(),
            weight,
        })
        .collect();

    Ok(TextExplanation {
        review_id: review_id.to_string(),
        predicted_survived: y[0] >= 0.5,
        probability: y[0],
        word_weights,
        local_fit_r2: fit.r2,
        kernel_width: config.kernel_width,
        num_samples: n,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FnModel<F: Fn(&[f64]) -> f64>(F);

    impl<F: Fn(&[f64]) -> f64> ProbClassifier for FnModel<F> {
        fn predict_rows(&self, x: &Matrix) -> Vec<f64> {
            x.iter_rows().map(|r| (self.0)(r)).collect()
        }
    }

    fn vocab() -> Vocabulary {
        Vocabulary::from_terms(
            ["great", "food", "slow", "service", "pizza"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
    }

    #[test]
    fn indicator_model_ranks_planted_token_first() {
        let v = vocab();
        let great_idx = v.index_of("great").unwrap();
        let model = FnModel(move |r: &[f64]| if r[great_idx] > 0.0 { 0.9 } else { 0.1 });
        let e = explain_text(
            &model,
            &v,
            "r1",
            "Great food but slow service",
            &TextExplainerConfig {
                num_samples: 500,
                seed: 4,
                ..TextExplainerConfig::default()
            },
        )
        .unwrap();
        assert_eq!(e.word_weights[0].token, "great");
        assert!(e.word_weights[0].weight > 0.0);
        assert!(e.local_fit_r2 > 0.9);
    }

    #[test]
    fn weights_only_for_source_tokens() {
        let v = vocab();
        let model = FnModel(|r: &[f64]| 0.5 + 0.01 * r.iter().sum::<f64>());
        let e = explain_text(&model, &v, "r1", "pizza was great", &TextExplainerConfig::default())
            .unwrap();
        let source: Vec<&str> = vec!["pizza", "great"];
        for w in &e.word_weights {
            assert!(source.contains(&w.token.as_str()), "{:?}", w.token);
        }
        assert_eq!(e.word_weights.len(), 2);
    }

    #[test]
    fn no_in_vocab_tokens_is_an_error() {
        let v = vocab();
        let model = FnModel(|_: &[f64]| 0.5);
        let err = explain_text(&model, &v, "r1", "qwerty zxcvb", &TextExplainerConfig::default())
            .unwrap_err();
        assert!(err.to_string().contains("unexplainable input"));
    }

    #[test]
    fn deterministic_under_seed() {
        let v = vocab();
        let model = FnModel(|r: &[f64]| 0.3 + 0.1 * r[0] + 0.05 * r[2]);
        let config = TextExplainerConfig {
            seed: 12,
            num_samples: 400,
            ..TextExplainerConfig::default()
        };
        let a = explain_text(&model, &v, "r1", "great food slow pizza", &config).unwrap();
        let b = explain_text(&model, &v, "r1", "great food slow pizza", &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn repeated_tokens_mask_together() {
        let v = vocab();
        // Model counts occurrences of "pizza"; text has it twice.
        let pizza_idx = v.index_of("pizza").unwrap();
        let model = FnModel(move |r: &[f64]| 0.1 + 0.2 * r[pizza_idx]);
        let e = explain_text(
            &model,
            &v,
            "r1",
            "pizza great pizza food slow service",
            &TextExplainerConfig {
                num_samples: 600,
                seed: 2,
                ..TextExplainerConfig::default()
            },
        )
        .unwrap();
        // Both occurrences toggle together: weight reflects 2 * 0.2.
        assert_eq!(e.word_weights[0].token, "pizza");
        assert!(e.word_weights[0].weight > 0.3);
    }
}
