//! Logistic regression trained by deterministic batch gradient descent.
//!
//! The step size is 1/L with L estimated from the data Gram matrix by
//! power iteration, and Nesterov acceleration keeps convergence practical
//! on wide bag-of-words inputs. No randomness anywhere: retraining on the
//! same data is bit-identical.

use serde::{Deserialize, Serialize};

use super::dataset::Matrix;
use crate::error::{Error, Result};
use crate::numeric::sigmoid;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct LrParams {
    pub max_iters: usize,
    /// Stop when the gradient infinity-norm falls below this.
    pub tol: f64,
    pub l2: f64,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            max_iters: 500,
            tol: 1e-7,
            l2: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LrModel {
    pub fn zeros(cols: usize) -> LrModel {
        LrModel {
            weights: vec![0.0; cols],
            bias: 0.0,
        }
    }

    pub fn predict_rows(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows()
            .map(|row| {
                let z: f64 = row
                    .iter()
                    .zip(&self.weights)
                    .map(|(a, w)| a * w)
                    .sum::<f64>()
                    + self.bias;
                sigmoid(z)
            })
            .collect()
    }
}

/// Largest eigenvalue of X^T X / n by power iteration from a fixed start.
fn gram_spectral_bound(x: &Matrix) -> f64 {
    let n = x.rows().max(1) as f64;
    let cols = x.cols();
    let mut u = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut lambda = 1.0;
    for _ in 0..30 {
        // v = X^T (X u) / n
        let mut xu = vec![0.0; x.rows()];
        for (i, row) in x.iter_rows().enumerate() {
            xu[i] = row.iter().zip(&u).map(|(a, b)| a * b).sum();
        }
        let mut v = vec![0.0; cols];
        for (i, row) in x.iter_rows().enumerate() {
            let s = xu[i] / n;
            for (vj, a) in v.iter_mut().zip(row) {
                *vj += a * s;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-30 {
            return 1.0;
        }
        lambda = norm;
        for (uj, vj) in u.iter_mut().zip(&v) {
            *uj = vj / norm;
        }
    }
    lambda
}

pub fn train_lr(x: &Matrix, y: &[bool], params: &LrParams) -> Result<LrModel> {
    let n = x.rows();
    assert_eq!(n, y.len());
    if n == 0 {
        return Err(Error::invalid("lr: empty training set"));
    }
    let cols = x.cols();
    let targets: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();

    // Logistic-loss curvature is at most a quarter of the Gram spectrum,
    // plus the ridge term; the bias contributes at most 1/4.
    let lipschitz = gram_spectral_bound(x) / 4.0 + params.l2 + 0.25;
    let step = 1.0 / lipschitz;

    let mut w = vec![0.0; cols];
    let mut b = 0.0;
    let mut w_prev = w.clone();
    let mut b_prev = b;

    for iter in 0..params.max_iters {
        // Nesterov lookahead point.
        let beta = iter as f64 / (iter as f64 + 3.0);
        let wa: Vec<f64> = w
            .iter()
            .zip(&w_prev)
            .map(|(c, p)| c + beta * (c - p))
            .collect();
        let ba = b + beta * (b - b_prev);

        let mut grad_w = vec![0.0; cols];
        let mut grad_b = 0.0;
        for (row, target) in x.iter_rows().zip(&targets) {
            let z: f64 = row.iter().zip(&wa).map(|(a, c)| a * c).sum::<f64>() + ba;
            let err = sigmoid(z) - target;
            grad_b += err;
            for (g, a) in grad_w.iter_mut().zip(row) {
                *g += err * a;
            }
        }
        grad_b /= n as f64;
        for (g, c) in grad_w.iter_mut().zip(&wa) {
            *g = *g / n as f64 + params.l2 * c;
        }
        if !grad_b.is_finite() || grad_w.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid(format!(
                "lr: non-finite gradient at iteration {iter}"
            )));
        }

        w_prev = w;
        b_prev = b;
        w = wa
            .iter()
            .zip(&grad_w)
            .map(|(c, g)| c - step * g)
            .collect();
        b = ba - step * grad_b;

        let grad_inf = grad_w
            .iter()
            .fold(grad_b.abs(), |acc, g| acc.max(g.abs()));
        if grad_inf <= params.tol {
            break;
        }
    }
    Ok(LrModel { weights: w, bias: b })
}
