//! Regression trees grown by variance reduction.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Dataset, LearnError, Predict};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
        mean: f64,
        count: usize,
    },
    Leaf {
        prediction: f64,
        count: usize,
    },
}

impl Node {
    pub fn count(&self) -> usize {
        match self {
            Node::Internal { count, .. } | Node::Leaf { count, .. } => *count,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { prediction, .. } => return *prediction,
                Node::Internal { feature, threshold, left, right, .. } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Depth of the deepest leaf; a lone leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Internal { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    pub fn uses_feature(&self, f: usize) -> bool {
        match self {
            Node::Leaf { .. } => false,
            Node::Internal { feature, left, right, .. } => {
                *feature == f || left.uses_feature(f) || right.uses_feature(f)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Splitter {
    /// Exhaustive scan of every midpoint between distinct sorted values.
    Best,
    /// One uniform threshold per candidate feature.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub splitter: Splitter,
    /// Candidate features drawn per node.
    pub max_features: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

impl TreeParams {
    pub fn cart(n_features: usize) -> Self {
        TreeParams {
            splitter: Splitter::Best,
            max_features: n_features,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_depth: None,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<(), LearnError> {
        if self.max_features == 0 || self.max_features > n_features {
            return Err(LearnError::BadParams("max_features must lie in 1..=feature count"));
        }
        if self.min_samples_leaf == 0 {
            return Err(LearnError::BadParams("min_samples_leaf must be at least 1"));
        }
        if self.min_samples_split < 2 {
            return Err(LearnError::BadParams("min_samples_split must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub n_features: usize,
    pub root: Node,
}

impl Predict for RegressionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        self.root.predict(row)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.gain > o.gain
                    || (self.gain == o.gain
                        && (self.feature < o.feature
                            || (self.feature == o.feature && self.threshold < o.threshold)))
            }
        }
    }
}

struct Grower<'a> {
    data: &'a Dataset,
    params: TreeParams,
    rng: &'a mut Rng,
    features: Vec<usize>,
    scratch: Vec<(f64, f64)>,
}

/// Grows one tree on `sample`, a list of row indices that may repeat
/// (bootstrap multiplicity counts towards node sizes).
pub fn grow(data: &Dataset, sample: &[usize], params: &TreeParams, rng: &mut Rng) -> Result<RegressionTree, LearnError> {
    if sample.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    params.validate(data.n_features)?;
    let mut indices = sample.to_vec();
    let mut grower = Grower {
        data,
        params: *params,
        rng,
        features: (0..data.n_features).collect(),
        scratch: Vec::new(),
    };
    let root = grower.build(&mut indices, 0);
    Ok(RegressionTree { n_features: data.n_features, root })
}

impl Grower<'_> {
    fn build(&mut self, idx: &mut [usize], depth: usize) -> Node {
        let n = idx.len();
        let y = &self.data.y;
        let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / n as f64;
        let leaf = Node::Leaf { prediction: mean, count: n };
        let first = y[idx[0]];
        if n < self.params.min_samples_split
            || n < 2 * self.params.min_samples_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || idx.iter().all(|&i| y[i] == first)
        {
            return leaf;
        }
        let Some(best) = self.find_split(idx, mean) else {
            return leaf;
        };
        let data = self.data;
        let mut left: Vec<usize> = Vec::with_capacity(n);
        let mut right: Vec<usize> = Vec::with_capacity(n);
        for &i in idx.iter() {
            if data.value(i, best.feature) <= best.threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        let nl = left.len();
        idx[..nl].copy_from_slice(&left);
        idx[nl..].copy_from_slice(&right);
        drop((left, right));
        let (li, ri) = idx.split_at_mut(nl);
        Node::Internal {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.build(li, depth + 1)),
            right: Box::new(self.build(ri, depth + 1)),
            mean,
            count: n,
        }
    }

    /// Draws features without replacement until `max_features` non-constant
    /// ones have been scored, or the pool runs out.
    fn find_split(&mut self, idx: &[usize], mean: f64) -> Option<Candidate> {
        let p = self.features.len();
        for (k, f) in self.features.iter_mut().enumerate() {
            *f = k;
        }
        let mut best: Option<Candidate> = None;
        let mut scored = 0;
        let mut drawn = 0;
        while scored < self.params.max_features && drawn < p {
            let pick = if self.params.max_features == p {
                drawn
            } else {
                self.rng.random_range(drawn..p)
            };
            self.features.swap(drawn, pick);
            let f = self.features[drawn];
            drawn += 1;
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.data.value(i, f);
                (lo.min(v), hi.max(v))
            });
            if lo >= hi {
                continue;
            }
            scored += 1;
            let cand = match self.params.splitter {
                Splitter::Best => self.best_threshold(idx, f, mean),
                Splitter::Random => self.random_threshold(idx, f, mean, lo, hi),
            };
            if let Some(c) = cand {
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn best_threshold(&mut self, idx: &[usize], f: usize, mean: f64) -> Option<Candidate> {
        let n = idx.len();
        let msl = self.params.min_samples_leaf;
        self.scratch.clear();
        self.scratch.extend(idx.iter().map(|&i| (self.data.value(i, f), self.data.y[i] - mean)));
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = self.scratch.iter().map(|p| p.1).sum();
        let mut best: Option<Candidate> = None;
        let mut s_left = 0.0;
        for k in 0..n - 1 {
            s_left += self.scratch[k].1;
            let (va, vb) = (self.scratch[k].0, self.scratch[k + 1].0);
            let nl = k + 1;
            if va == vb || nl < msl || n - nl < msl {
                continue;
            }
            let s_right = total - s_left;
            let gain = s_left * s_left / nl as f64 + s_right * s_right / (n - nl) as f64;
            let cand = Candidate { gain, feature: f, threshold: midpoint(va, vb) };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
        best
    }

    fn random_threshold(&mut self, idx: &[usize], f: usize, mean: f64, lo: f64, hi: f64) -> Option<Candidate> {
        let u: f64 = self.rng.random();
        let mut t = lo + u * (hi - lo);
        if !(t > lo && t < hi) {
            t = midpoint(lo, hi);
        }
        let (mut nl, mut s_left, mut s_right) = (0usize, 0.0, 0.0);
        for &i in idx {
            let c = self.data.y[i] - mean;
            if self.data.value(i, f) <= t {
                nl += 1;
                s_left += c;
            } else {
                s_right += c;
            }
        }
        let nr = idx.len() - nl;
        let msl = self.params.min_samples_leaf;
        if nl < msl || nr < msl || nl == 0 || nr == 0 {
            return None;
        }
        let gain = s_left * s_left / nl as f64 + s_right * s_right / nr as f64;
        Some(Candidate { gain, feature: f, threshold: t })
    }
}

/// A threshold `t` with `a <= t < b`, strictly above `a` unless the two are
/// adjacent floats.
fn midpoint(a: f64, b: f64) -> f64 {
    let t = a + (b - a) / 2.0;
    if t < b {
        t
    } else {
        a
    }
}
