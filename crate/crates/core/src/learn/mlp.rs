//! Single-hidden-layer perceptron trained by seeded mini-batch SGD.
//!
//! Rectifier hidden units, sigmoid output, logistic loss, momentum. All
//! randomness (init, epoch shuffles) flows from one seeded generator, so
//! training is bit-reproducible. The flat parameter/gradient accessors
//! exist so tests can check analytic gradients against finite differences.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Matrix;
use crate::error::{Error, Result};
use crate::numeric::sigmoid;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 64,
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.05,
            momentum: 0.9,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub input_dim: usize,
    pub hidden: usize,
    /// Row-major input x hidden.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpModel {
    pub fn init(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> MlpModel {
        let limit1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        let limit2 = (6.0 / (hidden + 1) as f64).sqrt();
        MlpModel {
            input_dim,
            hidden,
            w1: (0..input_dim * hidden)
                .map(|_| rng.random_range(-limit1..limit1))
                .collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| rng.random_range(-limit2..limit2)).collect(),
            b2: 0.0,
        }
    }

    fn hidden_activations(&self, row: &[f64]) -> Vec<f64> {
        let mut a = self.b1.clone();
        for (j, &v) in row.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let w_row = &self.w1[j * self.hidden..(j + 1) * self.hidden];
            for (acc, w) in a.iter_mut().zip(w_row) {
                *acc += v * w;
            }
        }
        for acc in &mut a {
            if *acc < 0.0 {
                *acc = 0.0;
            }
        }
        a
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let a = self.hidden_activations(row);
        let z: f64 = a.iter().zip(&self.w2).map(|(h, w)| h * w).sum::<f64>() + self.b2;
        sigmoid(z)
    }

    pub fn predict_rows(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|row| self.predict_row(row)).collect()
    }

    /// Flattened parameters in the order w1, b1, w2, b2.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.w1.clone();
        p.extend(&self.b1);
        p.extend(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let (w1, rest) = params.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, b2) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = b2[0];
    }

    /// Mean logistic loss over a batch (no regularization term).
    pub fn batch_loss(&self, x: &Matrix, y: &[f64]) -> f64 {
        let mut total = 0.0;
        for (row, &t) in x.iter_rows().zip(y) {
            let p = self.predict_row(row).clamp(1e-15, 1.0 - 1e-15);
            total -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
        }
        total / x.rows() as f64
    }

    /// Analytic gradient of `batch_loss`, flattened like `params`.
    pub fn batch_gradient(&self, x: &Matrix, y: &[f64]) -> Vec<f64> {
        let n = x.rows() as f64;
        let mut g_w1 = vec![0.0; self.w1.len()];
        let mut g_b1 = vec![0.0; self.b1.len()];
        let mut g_w2 = vec![0.0; self.w2.len()];
        let mut g_b2 = 0.0;
        for (row, &t) in x.iter_rows().zip(y) {
            let a = self.hidden_activations(row);
            let z: f64 = a.iter().zip(&self.w2).map(|(h, w)| h * w).sum::<f64>() + self.b2;
            let err = sigmoid(z) - t; // d loss / d z
            g_b2 += err;
            for (k, &h) in a.iter().enumerate() {
                g_w2[k] += err * h;
                if h > 0.0 {
                    let back = err * self.w2[k];
                    g_b1[k] += back;
                    for (j, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            g_w1[j * self.hidden + k] += back * v;
                        }
                    }
                }
            }
        }
        let mut g = g_w1;
        g.extend(g_b1);
        g.extend(g_w2);
        g.push(g_b2);
        for v in &mut g {
            *v /= n;
        }
        g
    }
}

pub fn train_mlp(x: &Matrix, y: &[bool], params: &MlpParams, seed: u64) -> Result<MlpModel> {
    let n = x.rows();
    assert_eq!(n, y.len());
    if n == 0 {
        return Err(Error::invalid("mlp: empty training set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MlpModel::init(x.cols(), params.hidden, &mut rng);
    let targets: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
    let batch = params.batch_size.max(1);

    let mut velocity = vec![0.0; model.params().len()];
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut bx = Matrix::zeros(0, x.cols());
            let mut by = Vec::with_capacity(chunk.len());
            for &i in chunk {
                bx.push_row(x.row(i));
                by.push(targets[i]);
            }
            let mut grad = model.batch_gradient(&bx, &by);
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::invalid(format!(
                    "mlp: non-finite gradient in epoch {epoch}"
                )));
            }
            // L2 on the weight matrices only.
            let mut p = model.params();
            let w1_len = model.w1.len();
            let b1_len = model.b1.len();
            let w2_len = model.w2.len();
            for (idx, g) in grad.iter_mut().enumerate() {
                let is_weight = idx < w1_len || (idx >= w1_len + b1_len && idx < w1_len + b1_len + w2_len);
                if is_weight {
                    *g += params.l2 * p[idx];
                }
            }
            for ((v, g), value) in velocity.iter_mut().zip(&grad).zip(p.iter_mut()) {
                *v = params.momentum * *v - params.learning_rate * g;
                *value += *v;
            }
            model.set_params(&p);
        }
    }
    Ok(model)
}
