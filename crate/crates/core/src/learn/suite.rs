//! Model specifications, the default suite and the leaderboard.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{
    r2, rmse, split, Dataset, ForestKind, ForestModel, ForestParams, KnnModel, LearnError, LinearKind,
    LinearModel, Predict, SplitConfig,
};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ModelSpec {
    Ols,
    Ridge { lambda: f64 },
    Knn { k: usize },
    Forest { kind: ForestKind, params: ForestParams },
}

impl ModelSpec {
    pub fn forest(kind: ForestKind, p: usize) -> Self {
        ModelSpec::Forest { kind, params: ForestParams::defaults(kind, p) }
    }

    pub fn name(&self) -> String {
        match self {
            ModelSpec::Ols => "OLS".to_string(),
            ModelSpec::Ridge { .. } => "Ridge".to_string(),
            ModelSpec::Knn { k } => format!("kNN(k={k})"),
            ModelSpec::Forest { kind, .. } => kind.as_str().to_string(),
        }
    }

    /// Looks a model up by its leaderboard name, with default parameters.
    pub fn by_name(name: &str, p: usize) -> Option<Self> {
        let lower = name.to_ascii_lowercase();
        Some(match lower.as_str() {
            "ols" => ModelSpec::Ols,
            "ridge" => ModelSpec::Ridge { lambda: 1.0 },
            "knn" => ModelSpec::Knn { k: 5 },
            "cart" => Self::forest(ForestKind::Cart, p),
            "bagging" => Self::forest(ForestKind::Bagging, p),
            "randomforest" | "rf" => Self::forest(ForestKind::RandomForest, p),
            "extratrees" | "et" => Self::forest(ForestKind::ExtraTrees, p),
            _ => return None,
        })
    }

    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<Model, LearnError> {
        Ok(match self {
            ModelSpec::Ols => Model::Linear(LinearModel::fit(LinearKind::Ols, train, 0.0)?),
            ModelSpec::Ridge { lambda } => Model::Linear(LinearModel::fit(LinearKind::Ridge, train, *lambda)?),
            ModelSpec::Knn { k } => Model::Knn(KnnModel::fit(train, *k)?),
            ModelSpec::Forest { kind, params } => Model::Forest(ForestModel::fit(*kind, train, params, seed)?),
        })
    }
}

/// The seven-model comparison suite for `p` features.
pub fn default_suite(p: usize) -> Vec<ModelSpec> {
    alloc::vec![
        ModelSpec::Ols,
        ModelSpec::Ridge { lambda: 1.0 },
        ModelSpec::Knn { k: 5 },
        ModelSpec::forest(ForestKind::Cart, p),
        ModelSpec::forest(ForestKind::Bagging, p),
        ModelSpec::forest(ForestKind::RandomForest, p),
        ModelSpec::forest(ForestKind::ExtraTrees, p),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Linear(LinearModel),
    Knn(KnnModel),
    Forest(ForestModel),
}

impl Model {
    pub fn name(&self) -> String {
        match self {
            Model::Linear(m) => match m.kind {
                LinearKind::Ols => "OLS".to_string(),
                LinearKind::Ridge => "Ridge".to_string(),
            },
            Model::Knn(m) => format!("kNN(k={})", m.k),
            Model::Forest(m) => m.kind.as_str().to_string(),
        }
    }
}

impl Predict for Model {
    fn n_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_features(),
            Model::Knn(m) => m.n_features(),
            Model::Forest(m) => m.n_features(),
        }
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            Model::Linear(m) => m.predict_row(row),
            Model::Knn(m) => m.predict_row(row),
            Model::Forest(m) => m.predict_row(row),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub train_rmse: f64,
    pub train_r2: f64,
    pub test_rmse: f64,
    pub test_r2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub name: String,
    /// Position in the declared suite.
    pub order: usize,
    pub result: Result<Scores, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub n_train: usize,
    pub n_test: usize,
    pub rows: Vec<LeaderboardRow>,
}

impl Leaderboard {
    pub fn get(&self, name: &str) -> Option<&Scores> {
        self.rows.iter().find(|r| r.name == name).and_then(|r| r.result.as_ref().ok())
    }
}

/// Seed handed to every model fit; independent of suite position so that
/// identical specs produce identical models.
pub fn fit_seed(split_seed: u64) -> u64 {
    rng::derive_seed(split_seed, 0xF17)
}

fn score(model: &Model, train: &Dataset, test: &Dataset) -> Result<Scores, LearnError> {
    let ptr = model.predict(train);
    let pte = model.predict(test);
    Ok(Scores {
        train_rmse: rmse(&train.y, &ptr)?,
        train_r2: r2(&train.y, &ptr)?,
        test_rmse: rmse(&test.y, &pte)?,
        test_r2: r2(&test.y, &pte)?,
    })
}

/// Trains every spec on one shared split and ranks by test R², then lower
/// test RMSE, then suite order. Failed models sink to the bottom.
pub fn compare_models(data: &Dataset, suite: &[ModelSpec], config: &SplitConfig) -> Result<Leaderboard, LearnError> {
    if suite.is_empty() {
        return Err(LearnError::BadParams("model suite is empty"));
    }
    let (train, test) = split(data, config)?;
    let seed = fit_seed(config.seed);
    let mut rows: Vec<LeaderboardRow> = suite
        .iter()
        .enumerate()
        .map(|(order, spec)| {
            let result = spec
                .fit(&train, seed)
                .and_then(|m| score(&m, &train, &test))
                .map_err(|e| e.to_string());
            LeaderboardRow { name: spec.name(), order, result }
        })
        .collect();
    rows.sort_by(|a, b| match (&a.result, &b.result) {
        (Ok(x), Ok(y)) => y
            .test_r2
            .total_cmp(&x.test_r2)
            .then(x.test_rmse.total_cmp(&y.test_rmse))
            .then(a.order.cmp(&b.order)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.order.cmp(&b.order),
    });
    Ok(Leaderboard { n_train: train.len(), n_test: test.len(), rows })
}
