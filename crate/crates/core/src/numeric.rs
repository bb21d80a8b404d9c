//! Small numeric helpers shared across feature modules.

/// Shannon entropy in nats of a nonnegative weight vector.
///
/// Weights are normalized internally; zero entries contribute nothing
/// (the `0 * ln 0 = 0` convention). An all-zero vector has entropy 0.
pub fn entropy_nats(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &w in weights {
        if w > 0.0 {
            let p = w / total;
            h -= p * p.ln();
        }
    }
    h
}

/// Ordinary-least-squares slope of `y` against the index 1..=n.
///
/// Returns 0 for fewer than two points.
pub fn ols_slope(y: &[f64]) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let x_mean = (n as f64 + 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let dx = (i as f64 + 1.0) - x_mean;
        num += dx * (yi - y_mean);
        den += dx * dx;
    }
    num / den
}

/// Per-column mean of a set of rows, all of width `cols`.
pub fn column_means(rows: &[Vec<f64>], cols: usize) -> Vec<f64> {
    let mut means = vec![0.0; cols];
    if rows.is_empty() {
        return means;
    }
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= rows.len() as f64;
    }
    means
}

/// Sigmoid with clamped input to avoid overflow in `exp`.
pub fn sigmoid(z: f64) -> f64 {
    let z = z.clamp(-500.0, 500.0);
    1.0 / (1.0 + (-z).exp())
}

/// Inverse sigmoid for a probability clamped away from {0, 1}.
pub fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_degenerate_cases() {
        assert_eq!(entropy_nats(&[5.0, 0.0, 0.0]), 0.0);
        assert_eq!(entropy_nats(&[0.0; 4]), 0.0);
        assert!((entropy_nats(&[2.0, 2.0]) - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_uniform_hits_ln_n() {
        let v = vec![1.0; 22];
        assert!((entropy_nats(&v) - 22.0f64.ln()).abs() < 1e-12);
        let v = vec![3.0; 24];
        assert!((entropy_nats(&v) - 24.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ols_slope_exact_line() {
        assert_eq!(ols_slope(&[5.0, 5.0, 5.0, 5.0, 5.0, 5.0]), 0.0);
        assert!((ols_slope(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_logit_roundtrip() {
        for &p in &[0.01, 0.25, 0.5, 0.9] {
            assert!((sigmoid(logit(p)) - p).abs() < 1e-12);
        }
    }
}
