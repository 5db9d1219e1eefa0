//! Shapley attributions: an exact tree algorithm, a permutation-sampling
//! estimator and a brute-force subset oracle.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learn::{Dataset, LinearModel, Model, Predict};
use crate::{par, rng};

pub mod exact;
pub mod importance;
pub mod sampling;
pub mod treeshap;

pub use exact::{conditional_expectation, shapley_bruteforce, Coalition, Interventional, PathConditional};
pub use importance::{aggregate, GlobalImportance};
pub use sampling::{shapley_sampling, SamplingEstimate};
pub use treeshap::{tree_shap, tree_shap_node};

/// Largest feature count the subset enumeration accepts.
pub const MAX_EXACT_FEATURES: usize = 15;

/// Cap on background rows for non-tree models.
pub const MAX_BACKGROUND: usize = 512;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ExplainError {
    #[error("exact enumeration supports at most {max} features, got {got}")]
    TooManyFeaturesForExact { got: usize, max: usize },
    #[error("expected {expected} feature values, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("no explanations to aggregate")]
    NoExplanations,
    #[error("background set is empty")]
    EmptyBackground,
    #[error("permutation count must be at least 1")]
    NoPermutations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    pub base_value: f64,
    pub phi: Vec<f64>,
    pub prediction: f64,
}

impl ShapExplanation {
    /// `|base + Σphi − prediction|` relative to `max(1, |prediction|)`.
    pub fn local_accuracy_error(&self) -> f64 {
        let total = self.base_value + self.phi.iter().sum::<f64>();
        (total - self.prediction).abs() / self.prediction.abs().max(1.0)
    }
}

/// Seeded subsample of at most [`MAX_BACKGROUND`] rows, in ascending row order.
pub fn background_rows(data: &Dataset, seed: u64) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut picked: Vec<usize> = if n <= MAX_BACKGROUND {
        (0..n).collect()
    } else {
        let mut r = rng::stream(seed, 0xBA6);
        rand::seq::index::sample(&mut r, n, MAX_BACKGROUND).into_vec()
    };
    picked.sort_unstable();
    picked.into_iter().map(|i| data.row(i).to_vec()).collect()
}

/// Exact interventional attribution for a linear model:
/// `phi_i = w_i (x_i − mean_b x_i)`.
pub fn linear_shap(model: &LinearModel, x: &[f64], background: &[Vec<f64>]) -> Result<ShapExplanation, ExplainError> {
    check_width(model.n_features(), x)?;
    if background.is_empty() {
        return Err(ExplainError::EmptyBackground);
    }
    let p = x.len();
    let mut mean = vec![0.0; p];
    for b in background {
        check_width(p, b)?;
        for (m, v) in mean.iter_mut().zip(b) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= background.len() as f64);
    let phi = (0..p).map(|i| model.weights[i] * (x[i] - mean[i])).collect();
    Ok(ShapExplanation { base_value: model.predict_row(&mean), phi, prediction: model.predict_row(x) })
}

pub(crate) fn check_width(expected: usize, x: &[f64]) -> Result<(), ExplainError> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(ExplainError::WidthMismatch { expected, got: x.len() })
    }
}

/// How [`explain_rows`] treats models without an exact algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub permutations: usize,
    pub seed: u64,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig { permutations: 256, seed: 0 }
    }
}

/// Attribution for any fitted model: the exact tree algorithm for forests,
/// the closed form for linear models, and sampling for nearest neighbours.
pub fn explain_model(
    model: &Model,
    x: &[f64],
    background: &[Vec<f64>],
    config: &ExplainConfig,
    stream: u64,
) -> Result<ShapExplanation, ExplainError> {
    match model {
        Model::Forest(f) => tree_shap(f, x),
        Model::Linear(l) => linear_shap(l, x, background),
        Model::Knn(k) => {
            let est = shapley_sampling(k, x, background, config.permutations, rng::derive_seed(config.seed, stream))?;
            Ok(est.explanation)
        }
    }
}

/// Explains every row, in parallel when enabled; output order matches input.
pub fn explain_rows(
    model: &Model,
    rows: &[Vec<f64>],
    background: &[Vec<f64>],
    config: &ExplainConfig,
) -> Result<Vec<ShapExplanation>, ExplainError> {
    par::map_range(rows.len(), |i| explain_model(model, &rows[i], background, config, i as u64))
        .into_iter()
        .collect()
}
