//! Tree ensembles: CART, bagging, random forests and extremely randomized trees.

use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Node, RegressionTree, Splitter, TreeParams};
use super::{Dataset, LearnError, Predict};
use crate::{par, rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForestKind {
    Cart,
    Bagging,
    RandomForest,
    ExtraTrees,
}

impl ForestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ForestKind::Cart => "CART",
            ForestKind::Bagging => "Bagging",
            ForestKind::RandomForest => "RandomForest",
            ForestKind::ExtraTrees => "ExtraTrees",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl ForestParams {
    /// Defaults of each kind for `p` features.
    pub fn defaults(kind: ForestKind, p: usize) -> Self {
        let (n_trees, max_features, bootstrap) = match kind {
            ForestKind::Cart => (1, p, false),
            ForestKind::Bagging => (50, p, true),
            ForestKind::RandomForest => (100, p.div_ceil(3), true),
            ForestKind::ExtraTrees => (100, p, false),
        };
        ForestParams {
            n_trees,
            max_features,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap,
        }
    }

    fn tree_params(&self, kind: ForestKind) -> TreeParams {
        TreeParams {
            splitter: if kind == ForestKind::ExtraTrees { Splitter::Random } else { Splitter::Best },
            max_features: self.max_features,
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub kind: ForestKind,
    pub params: ForestParams,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<Node>,
}

impl ForestModel {
    pub fn fit(kind: ForestKind, train: &Dataset, params: &ForestParams, seed: u64) -> Result<Self, LearnError> {
        train.validate()?;
        let n = train.len();
        if n == 0 {
            return Err(LearnError::EmptyDataset);
        }
        if params.n_trees == 0 {
            return Err(LearnError::BadParams("tree count must be at least 1"));
        }
        if kind == ForestKind::Cart && params.n_trees != 1 {
            return Err(LearnError::BadParams("CART is a single tree"));
        }
        let tp = params.tree_params(kind);
        tp.validate(train.n_features)?;
        let grown = par::map_range(params.n_trees, |t| {
            let mut r = rng::stream(seed, t as u64);
            let sample = if params.bootstrap {
                bootstrap_sample(n, &mut r)
            } else {
                (0..n).collect()
            };
            grow(train, &sample, &tp, &mut r).map(|t| t.root)
        });
        let trees = grown.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(ForestModel { kind, params: *params, seed, n_features: train.n_features, trees })
    }

    pub fn tree(&self, t: usize) -> RegressionTree {
        RegressionTree { n_features: self.n_features, root: self.trees[t].clone() }
    }
}

/// `n` indices drawn uniformly with replacement from `0..n`.
pub fn bootstrap_sample(n: usize, rng: &mut rng::Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

pub fn running_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut m = 0.0;
    for (k, v) in values.enumerate() {
        m += (v - m) / (k + 1) as f64;
    }
    m
}

impl Predict for ForestModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Running mean over trees, which stays exact when all trees agree.
    fn predict_row(&self, row: &[f64]) -> f64 {
        running_mean(self.trees.iter().map(|t| t.predict(row)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;

    fn grid(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![(i % 7) as f64, (i / 7) as f64, (i * 13 % 11) as f64]).collect();
        let y = rows.iter().map(|r| r[0] * r[0] - 2.0 * r[1] + libm::sin(r[2])).collect();
        Dataset::from_rows(&rows, y, vec![String::from("d"); n]).unwrap()
    }

    #[test]
    fn constant_target_predicts_constant() {
        let mut d = grid(30);
        d.y.iter_mut().for_each(|v| *v = 4.25);
        for kind in [ForestKind::Cart, ForestKind::Bagging, ForestKind::RandomForest, ForestKind::ExtraTrees] {
            let mut p = ForestParams::defaults(kind, 3);
            p.n_trees = p.n_trees.min(5);
            let m = ForestModel::fit(kind, &d, &p, 1).unwrap();
            assert!(m.trees.iter().all(|t| matches!(t, Node::Leaf { .. })));
            assert_eq!(m.predict_row(&[100.0, -3.0, 0.5]), 4.25);
        }
    }

    #[test]
    fn fully_grown_fits_training_rows() {
        let d = grid(49);
        for kind in [ForestKind::Cart, ForestKind::ExtraTrees] {
            let mut p = ForestParams::defaults(kind, 3);
            p.n_trees = p.n_trees.min(10);
            let m = ForestModel::fit(kind, &d, &p, 2).unwrap();
            assert_eq!(m.predict(&d), d.y);
        }
    }

    #[test]
    fn seed_determinism() {
        let d = grid(40);
        let p = ForestParams { n_trees: 8, ..ForestParams::defaults(ForestKind::RandomForest, 3) };
        let a = ForestModel::fit(ForestKind::RandomForest, &d, &p, 9).unwrap();
        let b = ForestModel::fit(ForestKind::RandomForest, &d, &p, 9).unwrap();
        assert_eq!(a, b);
        let c = ForestModel::fit(ForestKind::RandomForest, &d, &p, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn defaults_match_suite() {
        assert_eq!(ForestParams::defaults(ForestKind::RandomForest, 29).max_features, 10);
        assert_eq!(ForestParams::defaults(ForestKind::ExtraTrees, 29).max_features, 29);
        assert!(!ForestParams::defaults(ForestKind::ExtraTrees, 29).bootstrap);
        assert_eq!(ForestParams::defaults(ForestKind::Bagging, 29).n_trees, 50);
    }

    #[test]
    fn bootstrap_draws_within_range() {
        let mut r = rng::seeded(4);
        let s = bootstrap_sample(25, &mut r);
        assert_eq!(s.len(), 25);
        assert!(s.iter().all(|&i| i < 25));
    }

    #[test]
    fn invalid_params() {
        let d = grid(10);
        let mut p = ForestParams::defaults(ForestKind::Bagging, 3);
        p.n_trees = 0;
        assert!(ForestModel::fit(ForestKind::Bagging, &d, &p, 0).is_err());
        let mut p = ForestParams::defaults(ForestKind::RandomForest, 3);
        p.max_features = 4;
        assert!(ForestModel::fit(ForestKind::RandomForest, &d, &p, 0).is_err());
    }
}
