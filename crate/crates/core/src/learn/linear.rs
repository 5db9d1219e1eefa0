//! Least squares and ridge regression on centered data, solved by Cholesky.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Dataset, LearnError, Predict};

/// Ridge strength used when OLS meets a rank-deficient design, relative to
/// the mean diagonal of the centered Gram matrix.
pub const FALLBACK_RELATIVE_LAMBDA: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearKind {
    Ols,
    Ridge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Set when OLS fell back to ridge; holds the lambda actually used.
    pub fallback_lambda: Option<f64>,
}

impl LinearModel {
    pub fn fit(kind: LinearKind, train: &Dataset, lambda: f64) -> Result<Self, LearnError> {
        train.validate()?;
        if train.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        if kind == LinearKind::Ridge && !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(LearnError::BadParams("ridge lambda must be finite and non-negative"));
        }
        let p = train.n_features;
        let n = train.len() as f64;
        let mut x_mean = vec![0.0; p];
        for row in train.rows() {
            for (m, v) in x_mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        x_mean.iter_mut().for_each(|m| *m /= n);
        let y_mean = super::mean(&train.y);

        let mut gram = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        let mut xc = vec![0.0; p];
        for (row, y) in train.rows().zip(&train.y) {
            for j in 0..p {
                xc[j] = row[j] - x_mean[j];
            }
            let yc = y - y_mean;
            for j in 0..p {
                rhs[j] += xc[j] * yc;
                for k in 0..=j {
                    gram[j * p + k] += xc[j] * xc[k];
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                gram[k * p + j] = gram[j * p + k];
            }
        }

        let lam = if kind == LinearKind::Ols { 0.0 } else { lambda };
        let (weights, fallback_lambda) = match solve_ridge(&gram, &rhs, p, lam) {
            Some(w) => (w, None),
            None => {
                let scale = (0..p).map(|j| gram[j * p + j]).sum::<f64>() / p as f64;
                let tiny = FALLBACK_RELATIVE_LAMBDA * scale.max(f64::MIN_POSITIVE);
                let w = solve_ridge(&gram, &rhs, p, lam + tiny)
                    .ok_or(LearnError::BadParams("design matrix is degenerate"))?;
                (w, Some(lam + tiny))
            }
        };
        let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
        Ok(LinearModel { kind, lambda: lam, weights, intercept, fallback_lambda })
    }
}

/// Solves `(G + lam I) w = b`; `None` when a pivot collapses relative to its
/// diagonal, which signals rank deficiency.
fn solve_ridge(gram: &[f64], rhs: &[f64], p: usize, lam: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let diag = gram[j * p + j] + lam;
        let mut d = diag;
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if d.is_nan() || d <= 1e-10 * diag.max(f64::MIN_POSITIVE) {
            return None;
        }
        let d = libm::sqrt(d);
        l[j * p + j] = d;
        for i in j + 1..p {
            let mut s = gram[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / d;
        }
    }
    let mut z = vec![0.0; p];
    for i in 0..p {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[i * p + k] * z[k];
        }
        z[i] = s / l[i * p + i];
    }
    let mut w = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s -= l[k * p + i] * w[k];
        }
        w[i] = s / l[i * p + i];
    }
    Some(w)
}

impl Predict for LinearModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }
}
