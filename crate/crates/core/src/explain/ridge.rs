//! Weighted ridge regression for local surrogate fitting.

use crate::error::{Error, Result};
use crate::learn::Matrix;

pub struct RidgeFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Weighted R^2 of the surrogate fit, clamped into [0, 1].
    pub r2: f64,
}

/// Solve min_w sum_i w_i (y_i - b - z_i . c)^2 + alpha |c|^2 by normal
/// equations with a Cholesky factorization. The intercept is unpenalized.
pub fn weighted_ridge(z: &Matrix, y: &[f64], weights: &[f64], alpha: f64) -> Result<RidgeFit> {
    let n = z.rows();
    assert_eq!(n, y.len());
    assert_eq!(n, weights.len());
    if n == 0 {
        return Err(Error::invalid("ridge: empty sample"));
    }
    let f = z.cols();
    let dim = f + 1; // intercept first

    // Normal equations A beta = b over the augmented design [1, z].
    let mut a = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for (i, row) in z.iter_rows().enumerate() {
        let w = weights[i];
        if w == 0.0 {
            continue;
        }
        let wy = w * y[i];
        rhs[0] += wy;
        a[0] += w;
        for (j, &zj) in row.iter().enumerate() {
            if zj == 0.0 {
                continue;
            }
            let wz = w * zj;
            rhs[j + 1] += wy * zj;
            a[j + 1] += wz; // first row: sum w z_j
            for (k, &zk) in row.iter().enumerate().skip(j) {
                if zk != 0.0 {
                    a[(j + 1) * dim + (k + 1)] += wz * zk;
                }
            }
        }
    }
    // Mirror the first row into the first column and the upper triangle down.
    for j in 1..dim {
        a[j * dim] = a[j];
    }
    for j in 0..dim {
        for k in j + 1..dim {
            a[k * dim + j] = a[j * dim + k];
        }
    }
    for j in 1..dim {
        a[j * dim + j] += alpha;
    }

    let beta = cholesky_solve(&mut a, &rhs, dim)?;

    // Weighted R^2 against the weighted mean.
    let w_total: f64 = weights.iter().sum();
    if w_total <= 0.0 {
        return Err(Error::invalid("ridge: all sample weights are zero"));
    }
    let y_bar: f64 = y
        .iter()
        .zip(weights)
        .map(|(yi, wi)| yi * wi)
        .sum::<f64>()
        / w_total;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (i, row) in z.iter_rows().enumerate() {
        let pred: f64 =
            beta[0] + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
        ss_res += weights[i] * (y[i] - pred) * (y[i] - pred);
        ss_tot += weights[i] * (y[i] - y_bar) * (y[i] - y_bar);
    }
    let r2 = if ss_tot <= 1e-30 {
        // Constant response: the surrogate is exact.
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };

    Ok(RidgeFit {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        r2,
    })
}

/// In-place Cholesky solve of a symmetric positive-definite system.
fn cholesky_solve(a: &mut [f64], b: &[f64], dim: usize) -> Result<Vec<f64>> {
    // Factor A = L L^T, overwriting the lower triangle.
    for attempt in 0..2 {
        let mut ok = true;
        let mut l = a.to_vec();
        'factor: for j in 0..dim {
            let mut d = l[j * dim + j];
            for k in 0..j {
                d -= l[j * dim + k] * l[j * dim + k];
            }
            if d <= 0.0 {
                ok = false;
                break 'factor;
            }
            let d = d.sqrt();
            l[j * dim + j] = d;
            for i in j + 1..dim {
                let mut s = l[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                l[i * dim + j] = s / d;
            }
        }
        if ok {
            // Forward and back substitution.
            let mut x = b.to_vec();
            for i in 0..dim {
                for k in 0..i {
                    x[i] -= l[i * dim + k] * x[k];
                }
                x[i] /= l[i * dim + i];
            }
            for i in (0..dim).rev() {
                for k in i + 1..dim {
                    x[i] -= l[k * dim + i] * x[k];
                }
                x[i] /= l[i * dim + i];
            }
            return Ok(x);
        }
        if attempt == 0 {
            // Jitter the diagonal once for near-singular systems.
            for j in 0..dim {
                a[j * dim + j] += 1e-8;
            }
        }
    }
    Err(Error::invalid("ridge: normal equations not positive definite"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_relation() {
        // y = 2 + 3 z1 - z2 on binary design; tiny alpha.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for a in [0.0, 1.0] {
            for b in [0.0, 1.0] {
                for _ in 0..5 {
                    rows.push(vec![a, b]);
                    y.push(2.0 + 3.0 * a - b);
                }
            }
        }
        let z = Matrix::from_rows(rows);
        let w = vec![1.0; y.len()];
        let fit = weighted_ridge(&z, &y, &w, 1e-9).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-6);
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-6);
        assert!((fit.coefficients[1] + 1.0).abs() < 1e-6);
        assert!(fit.r2 > 0.999999);
    }

    #[test]
    fn constant_response_gives_zero_coefficients() {
        let z = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let y = vec![0.7, 0.7, 0.7];
        let w = vec![1.0, 1.0, 1.0];
        let fit = weighted_ridge(&z, &y, &w, 1.0).unwrap();
        for c in &fit.coefficients {
            assert!(c.abs() < 1e-9);
        }
        assert!((fit.intercept - 0.7).abs() < 1e-6);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn weights_shift_the_fit() {
        // Two inconsistent clusters; weights decide which dominates.
        let z = Matrix::from_rows(vec![vec![1.0], vec![1.0], vec![0.0], vec![0.0]]);
        let y = vec![1.0, 0.0, 0.0, 0.0];
        let heavy_first = weighted_ridge(&z, &y, &[100.0, 1.0, 1.0, 1.0], 1e-6).unwrap();
        let heavy_second = weighted_ridge(&z, &y, &[1.0, 100.0, 1.0, 1.0], 1e-6).unwrap();
        assert!(heavy_first.coefficients[0] > heavy_second.coefficients[0]);
    }

    #[test]
    fn matches_direct_weighted_least_squares_oracle() {
        // Single-feature closed form: minimize sum w (y - b - c z)^2 + a c^2.
        let z_vals = [0.0, 1.0, 1.0, 0.0, 1.0];
        let y = [0.2, 0.9, 0.8, 0.1, 1.0];
        let w = [1.0, 0.5, 2.0, 1.5, 1.0];
        let alpha = 0.7;
        let sw: f64 = w.iter().sum();
        let szw: f64 = z_vals.iter().zip(&w).map(|(z, w)| z * w).sum();
        let szzw: f64 = z_vals.iter().zip(&w).map(|(z, w)| z * z * w).sum();
        let syw: f64 = y.iter().zip(&w).map(|(y, w)| y * w).sum();
        let szyw: f64 = z_vals
            .iter()
            .zip(&y)
            .zip(&w)
            .map(|((z, y), w)| z * y * w)
            .sum();
        // 2x2 normal equations [sw szw; szw szzw+alpha] [b c] = [syw szyw]
        let det = sw * (szzw + alpha) - szw * szw;
        let b_expect = (syw * (szzw + alpha) - szw * szyw) / det;
        let c_expect = (sw * szyw - szw * syw) / det;

        let z = Matrix::from_rows(z_vals.iter().map(|&v| vec![v]).collect());
        let fit = weighted_ridge(&z, &y, &w, alpha).unwrap();
        assert!((fit.intercept - b_expect).abs() < 1e-10);
        assert!((fit.coefficients[0] - c_expect).abs() < 1e-10);
    }
}
