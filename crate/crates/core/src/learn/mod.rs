//! Regression models, train/test splitting and evaluation metrics.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

pub mod forest;
pub mod knn;
pub mod linear;
pub mod suite;
pub mod tree;

pub use forest::{ForestKind, ForestModel, ForestParams};
pub use knn::KnnModel;
pub use linear::{LinearKind, LinearModel};
pub use suite::{compare_models, default_suite, fit_seed, Leaderboard, LeaderboardRow, Model, ModelSpec, Scores};
pub use tree::{Node, RegressionTree};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LearnError {
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("dataset is inconsistent: {0}")]
    Inconsistent(&'static str),
    #[error("need at least {needed} rows to split, have {have}")]
    TooFewRows { needed: usize, have: usize },
    #[error("grouped split needs at least two groups, have {0}")]
    TooFewGroups(usize),
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("invalid model parameters: {0}")]
    BadParams(&'static str),
    #[error("k = {k} exceeds the {n} training rows")]
    KTooLarge { k: usize, n: usize },
    #[error("length mismatch: {0} targets vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("metric needs at least {0} values")]
    TooFewValues(usize),
    #[error("targets are constant; R² is undefined")]
    DegenerateTarget,
}

pub trait Predict {
    fn n_features(&self) -> usize;
    fn predict_row(&self, row: &[f64]) -> f64;

    fn predict(&self, data: &Dataset) -> Vec<f64> {
        (0..data.len()).map(|i| self.predict_row(data.row(i))).collect()
    }
}

/// Row-major feature matrix with targets and per-row group (designer) ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub n_features: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub groups: Vec<String>,
}

impl Dataset {
    pub fn new(n_features: usize, x: Vec<f64>, y: Vec<f64>, groups: Vec<String>) -> Result<Self, LearnError> {
        let ds = Dataset { n_features, x, y, groups };
        ds.validate()?;
        Ok(ds)
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>, groups: Vec<String>) -> Result<Self, LearnError> {
        let n_features = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(LearnError::Inconsistent("ragged rows"));
        }
        Self::new(n_features, rows.concat(), y, groups)
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        if self.n_features == 0 && !self.y.is_empty() {
            return Err(LearnError::Inconsistent("zero feature columns"));
        }
        if self.x.len() != self.y.len() * self.n_features {
            return Err(LearnError::Inconsistent("matrix size does not match target count"));
        }
        if self.groups.len() != self.y.len() {
            return Err(LearnError::Inconsistent("group count does not match target count"));
        }
        if !self.x.iter().chain(self.y.iter()).all(|v| v.is_finite()) {
            return Err(LearnError::Inconsistent("non-finite value"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.x[i * self.n_features + feature]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.n_features.max(1)).take(self.len())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            x.extend_from_slice(self.row(i));
        }
        Dataset {
            n_features: self.n_features,
            x,
            y: indices.iter().map(|&i| self.y[i]).collect(),
            groups: indices.iter().map(|&i| self.groups[i].clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
    pub grouped: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { test_fraction: 0.2, seed: 0, grouped: false }
    }
}

/// Row indices of the two sides of a split, each in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle split. Grouped splits keep every group on one side.
pub fn split_indices(data: &Dataset, config: &SplitConfig) -> Result<SplitIndices, LearnError> {
    if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
        return Err(LearnError::BadFraction(config.test_fraction));
    }
    let n = data.len();
    if n < 2 {
        return Err(LearnError::TooFewRows { needed: 2, have: n });
    }
    let target = (libm::round(n as f64 * config.test_fraction) as usize).clamp(1, n - 1);
    let mut rng = rng::stream(config.seed, 0x5_9117);
    let mut test = Vec::new();
    if config.grouped {
        let names: BTreeSet<&str> = data.groups.iter().map(String::as_str).collect();
        let mut names: Vec<&str> = names.into_iter().collect();
        if names.len() < 2 {
            return Err(LearnError::TooFewGroups(names.len()));
        }
        names.shuffle(&mut rng);
        let mut chosen = BTreeSet::new();
        let mut rows = 0;
        for name in &names[..names.len() - 1] {
            if rows >= target {
                break;
            }
            chosen.insert(*name);
            rows += data.groups.iter().filter(|g| g.as_str() == *name).count();
        }
        test.extend((0..n).filter(|&i| chosen.contains(data.groups[i].as_str())));
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        test.extend_from_slice(&order[..target]);
        test.sort_unstable();
    }
    let mut is_test = alloc::vec![false; n];
    for &i in &test {
        is_test[i] = true;
    }
    let train = (0..n).filter(|&i| !is_test[i]).collect();
    Ok(SplitIndices { train, test })
}

pub fn split(data: &Dataset, config: &SplitConfig) -> Result<(Dataset, Dataset), LearnError> {
    let idx = split_indices(data, config)?;
    Ok((data.subset(&idx.train), data.subset(&idx.test)))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64, LearnError> {
    if y.len() != y_hat.len() {
        return Err(LearnError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(LearnError::TooFewValues(1));
    }
    let sse: f64 = y.iter().zip(y_hat).map(|(a, b)| (b - a) * (b - a)).sum();
    Ok(libm::sqrt(sse / y.len() as f64))
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2(y: &[f64], y_hat: &[f64]) -> Result<f64, LearnError> {
    if y.len() != y_hat.len() {
        return Err(LearnError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.len() < 2 {
        return Err(LearnError::TooFewValues(2));
    }
    let y_bar = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - y_bar) * (v - y_bar)).sum();
    if ss_tot == 0.0 {
        return Err(LearnError::DegenerateTarget);
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rmse: f64,
    pub r2: f64,
    pub n_test: usize,
}

pub fn evaluate(model: &impl Predict, test: &Dataset) -> Result<EvaluationReport, LearnError> {
    let pred = model.predict(test);
    Ok(EvaluationReport { rmse: rmse(&test.y, &pred)?, r2: r2(&test.y, &pred)?, n_test: test.len() })
}
