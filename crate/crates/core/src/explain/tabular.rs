//! Local explanations for tabular models.
//!
//! The instance's continuous features are discretized into training-set
//! quartiles (binary features kept as categorical). Perturbations resample
//! each feature from its background marginal; a sample keeps the
//! instance's own value whenever the draw lands in the instance's bin.
//! A kernel-weighted ridge regression of the model's probabilities on the
//! bin-match indicators yields signed per-condition weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ridge::weighted_ridge;
use crate::error::{Error, Result};
use crate::learn::{Dataset, Matrix, ProbClassifier};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabularExplainerConfig {
    pub top_k: usize,
    pub num_samples: usize,
    /// Defaults to 0.75 * sqrt(number of perturbable features).
    pub kernel_width: Option<f64>,
    pub ridge_alpha: f64,
    pub seed: u64,
}

impl Default for TabularExplainerConfig {
    fn default() -> Self {
        TabularExplainerConfig {
            top_k: 10,
            num_samples: 5000,
            kernel_width: None,
            ridge_alpha: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplanationEntry {
    /// Human-readable condition, e.g. "attributes.review_count > 149".
    pub condition: String,
    /// Signed weight; positive pushes toward the survived class.
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabularExplanation {
    pub instance_id: String,
    /// True when the model's probability for the unperturbed instance is
    /// at least one half (the survived class).
    pub predicted_survived: bool,
    pub probability: f64,
    pub entries: Vec<ExplanationEntry>,
    pub local_fit_r2: f64,
    pub kernel_width: f64,
    pub num_samples: usize,
    pub seed: u64,
    /// Zero-variance background features excluded from perturbation.
    pub excluded_features: Vec<String>,
}

enum FeatureKind {
    Excluded,
    Categorical,
    Continuous { q1: f64, q2: f64, q3: f64 },
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

fn continuous_bin(value: f64, q1: f64, q2: f64, q3: f64) -> u8 {
    if value <= q1 {
        0
    } else if value <= q2 {
        1
    } else if value <= q3 {
        2
    } else {
        3
    }
}

fn classify_features(background: &Matrix) -> Vec<FeatureKind> {
    (0..background.cols())
        .map(|j| {
            let mut values: Vec<f64> = background.column(j).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values.dedup();
            match values.len() {
                0 | 1 => FeatureKind::Excluded,
                2 => FeatureKind::Categorical,
                _ => {
                    let mut sorted: Vec<f64> = background.column(j).collect();
                    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let q1 = quantile(&sorted, 0.25);
                    let q2 = quantile(&sorted, 0.50);
                    let q3 = quantile(&sorted, 0.75);
                    if q1 == q3 {
                        // Quartiles collapse; treat as categorical on bins.
                        FeatureKind::Categorical
                    } else {
                        FeatureKind::Continuous { q1, q2, q3 }
                    }
                }
            }
        })
        .collect()
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn condition_string(name: &str, kind: &FeatureKind, instance_value: f64) -> String {
    match kind {
        FeatureKind::Continuous { q1, q2, q3 } => {
            match continuous_bin(instance_value, *q1, *q2, *q3) {
                0 => format!("{name} <= {}", format_number(*q1)),
                1 => format!(
                    "{} < {name} <= {}",
                    format_number(*q1),
                    format_number(*q2)
                ),
                2 => format!(
                    "{} < {name} <= {}",
                    format_number(*q2),
                    format_number(*q3)
                ),
                _ => format!("{name} > {}", format_number(*q3)),
            }
        }
        _ => format!("{name} = {}", format_number(instance_value)),
    }
}

/// Explain one prediction of `model` at `x` against the training
/// `background`.
pub fn explain_tabular(
    model: &dyn ProbClassifier,
    instance_id: &str,
    x: &[f64],
    background: &Dataset,
    config: &TabularExplainerConfig,
) -> Result<TabularExplanation> {
    if background.is_empty() {
        return Err(Error::invalid("explain: empty background dataset"));
    }
    if x.len() != background.schema.len() {
        return Err(Error::SchemaMismatch(format!(
            "instance has {} features, background has {}",
            x.len(),
            background.schema.len()
        )));
    }
    let kinds = classify_features(&background.x);
    let included: Vec<usize> = kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| !matches!(k, FeatureKind::Excluded))
        .map(|(j, _)| j)
        .collect();
    let excluded_features: Vec<String> = kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| matches!(k, FeatureKind::Excluded))
        .map(|(j, _)| background.schema[j].clone())
        .collect();
    if included.is_empty() {
        return Err(Error::invalid(
            "explain: every background feature has zero variance",
        ));
    }

    let same_group = |j: usize, value: f64| -> bool {
        match &kinds[j] {
            FeatureKind::Categorical => value == x[j],
            FeatureKind::Continuous { q1, q2, q3 } => {
                continuous_bin(value, *q1, *q2, *q3) == continuous_bin(x[j], *q1, *q2, *q3)
            }
            FeatureKind::Excluded => true,
        }
    };

    let n = config.num_samples.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bg_rows = background.x.rows();
    let mut perturbed = Matrix::zeros(0, x.len());
    let mut z = Matrix::zeros(0, included.len());
    // Row 0 is the unperturbed instance (all indicators on).
    perturbed.push_row(x);
    z.push_row(&vec![1.0; included.len()]);
    let mut row_buf = x.to_vec();
    let mut z_buf = vec![1.0; included.len()];
    for _ in 1..n {
        row_buf.copy_from_slice(x);
        for (slot, &j) in included.iter().enumerate() {
            let draw = background.x.row(rng.random_range(0..bg_rows))[j];
            if same_group(j, draw) {
                z_buf[slot] = 1.0;
                // Keep the instance's own value.
            } else {
                z_buf[slot] = 0.0;
                row_buf[j] = draw;
            }
        }
        perturbed.push_row(&row_buf);
        z.push_row(&z_buf);
    }

    let y = model.predict_rows(&perturbed);
    let kernel_width = config
        .kernel_width
        .unwrap_or_else(|| 0.75 * (included.len() as f64).sqrt());
    let weights: Vec<f64> = z
        .iter_rows()
        .map(|row| {
            let mismatches: f64 = row.iter().map(|&v| 1.0 - v).sum();
            (-mismatches / (kernel_width * kernel_width)).exp()
        })
        .collect();

    let fit = weighted_ridge(&z, &y, &weights, config.ridge_alpha)?;

    let mut ranked: Vec<(usize, f64)> = included
        .iter()
        .zip(&fit.coefficients)
        .map(|(&j, &c)| (j, c))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .unwrap()
            .then(a.0.cmp(&b.0))
    });
    let entries: Vec<ExplanationEntry> = ranked
        .into_iter()
        .take(config.top_k)
        .map(|(j, weight)| ExplanationEntry {
            condition: condition_string(&background.schema[j], &kinds[j], x[j]),
            weight,
        })
        .collect();

    Ok(TabularExplanation {
        instance_id: instance_id.to_string(),
        predicted_survived: y[0] >= 0.5,
        probability: y[0],
        entries,
        local_fit_r2: fit.r2,
        kernel_width,
        num_samples: n,
        seed: config.seed,
        excluded_features,
    })
}
