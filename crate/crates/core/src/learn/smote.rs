//! SMOTE oversampling of the minority class.
//!
//! Synthetic rows interpolate between a minority seed point and one of its
//! k nearest minority neighbors (Euclidean in z-scored space), so every
//! synthetic point lies inside the minority class's convex hull. Applied
//! to the training fold only; the split happens upstream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Matrix, Scaler};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    /// Nearest-neighbor pool size.
    pub k: usize,
    /// Target minority:majority ratio after oversampling (1.0 = balanced).
    pub target_ratio: f64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k: 5,
            target_ratio: 1.0,
        }
    }
}

/// One synthetic row with its provenance: `row = seed + t * (neighbor - seed)`.
#[derive(Debug, Clone)]
pub struct SyntheticPoint {
    pub row: Vec<f64>,
    pub seed_idx: usize,
    pub neighbor_idx: usize,
    pub t: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SmoteReport {
    pub minority_before: usize,
    pub majority: usize,
    pub synthesized: usize,
    /// k actually used (lowered when the minority class is smaller than k+1).
    pub effective_k: usize,
    pub k_lowered: bool,
}

/// Generate `count` synthetic minority rows. Neighbors are found in
/// z-scored space; interpolation happens in the original feature space.
pub fn smote_rows(
    minority: &Matrix,
    k: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<SyntheticPoint>, usize)> {
    let n = minority.rows();
    if n == 0 {
        return Err(Error::invalid("smote: minority class is empty"));
    }
    let effective_k = k.min(n.saturating_sub(1));
    if count == 0 {
        return Ok((Vec::new(), effective_k));
    }

    let scaler = Scaler::fit(minority);
    let scaled = scaler.transform(minority);

    // All-pairs k-NN; minority classes are small by definition.
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            if effective_k == 0 {
                return Vec::new();
            }
            let mut dist: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2: f64 = scaled
                        .row(i)
                        .iter()
                        .zip(scaled.row(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d2, j)
                })
                .collect();
            dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            dist.truncate(effective_k);
            dist.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    let mut synthetic = Vec::with_capacity(count);
    for i in 0..count {
        let seed_idx = i % n;
        let (neighbor_idx, t) = if neighbors[seed_idx].is_empty() {
            // Degenerate single-point minority: duplicate the seed.
            (seed_idx, 0.0)
        } else {
            let pick = rng.random_range(0..neighbors[seed_idx].len());
            (neighbors[seed_idx][pick], rng.random::<f64>())
        };
        let row: Vec<f64> = minority
            .row(seed_idx)
            .iter()
            .zip(minority.row(neighbor_idx))
            .map(|(a, b)| a + t * (b - a))
            .collect();
        synthetic.push(SyntheticPoint {
            row,
            seed_idx,
            neighbor_idx,
            t,
        });
    }
    Ok((synthetic, effective_k))
}

/// Oversample the training fold's minority class up to
/// `target_ratio * majority`. Synthetic rows get ids `smote-<n>`.
pub fn oversample(
    train: &Dataset,
    config: &SmoteConfig,
    rng: &mut impl Rng,
) -> Result<(Dataset, SmoteReport)> {
    let minority_class = train.positives() * 2 <= train.len();
    let minority_idx: Vec<usize> = (0..train.len())
        .filter(|&i| train.y[i] == minority_class)
        .collect();
    let majority = train.len() - minority_idx.len();
    let target = (config.target_ratio * majority as f64).round() as usize;
    let needed = target.saturating_sub(minority_idx.len());

    let mut minority = Matrix::zeros(0, train.x.cols());
    for &i in &minority_idx {
        minority.push_row(train.x.row(i));
    }
    let (synthetic, effective_k) = smote_rows(&minority, config.k, needed, rng)?;

    let mut out = train.clone();
    for (n, point) in synthetic.iter().enumerate() {
        out.x.push_row(&point.row);
        out.y.push(minority_class);
        out.ids.push(format!("smote-{n}"));
    }
    let report = SmoteReport {
        minority_before: minority_idx.len(),
        majority,
        synthesized: synthetic.len(),
        effective_k,
        k_lowered: effective_k < config.k,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_minority_interpolates_on_segment() {
        let minority = Matrix::from_rows(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (points, k) = smote_rows(&minority, 1, 50, &mut rng).unwrap();
        assert_eq!(k, 1);
        for p in points {
            // Every synthetic point is (t, t) for t in [0, 1].
            assert!((p.row[0] - p.row[1]).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&p.row[0]));
        }
    }

    #[test]
    fn reaches_target_ratio_within_one() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..90 {
            rows.push(vec![i as f64, 0.0]);
            y.push(true);
        }
        for i in 0..10 {
            rows.push(vec![i as f64, 5.0]);
            y.push(false);
        }
        let d = Dataset {
            ids: (0..100).map(|i| format!("b{i}")).collect(),
            schema: vec!["a".into(), "b".into()],
            x: Matrix::from_rows(rows),
            y,
            tag: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (aug, report) = oversample(&d, &SmoteConfig::default(), &mut rng).unwrap();
        let minority_after = aug.y.iter().filter(|&&v| !v).count();
        assert!((minority_after as i64 - 90).abs() <= 1);
        assert_eq!(report.synthesized, 80);
        assert!(!report.k_lowered);
    }

    #[test]
    fn k_lowered_with_warning_flag() {
        let minority = Matrix::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (_, k) = smote_rows(&minority, 5, 4, &mut rng).unwrap();
        assert_eq!(k, 2);
    }

    #[test]
    fn deterministic_under_seed() {
        let minority =
            Matrix::from_rows((0..20).map(|i| vec![i as f64, (i * i) as f64]).collect());
        let mut rng_a = ChaCha8Rng::seed_from_u64(9);
        let mut rng_b = ChaCha8Rng::seed_from_u64(9);
        let (a, _) = smote_rows(&minority, 3, 10, &mut rng_a).unwrap();
        let (b, _) = smote_rows(&minority, 3, 10, &mut rng_b).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.row, q.row);
        }
    }
}
