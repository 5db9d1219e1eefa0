//! Coalition value functions and the subset-enumeration Shapley oracle.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_width, ExplainError, ShapExplanation, MAX_EXACT_FEATURES};
use crate::learn::forest::running_mean;
use crate::learn::{Node, Predict};

/// Expected tree output given only the features in `known`: known splits
/// follow `x`, unknown splits average both children by training count.
pub fn conditional_expectation(node: &Node, x: &[f64], known: &[bool]) -> f64 {
    match node {
        Node::Leaf { prediction, .. } => *prediction,
        Node::Internal { feature, threshold, left, right, .. } => {
            if known[*feature] {
                let next = if x[*feature] <= *threshold { left } else { right };
                conditional_expectation(next, x, known)
            } else {
                let (cl, cr) = (left.count() as f64, right.count() as f64);
                (cl * conditional_expectation(left, x, known) + cr * conditional_expectation(right, x, known))
                    / (cl + cr)
            }
        }
    }
}

/// A cooperative game over feature coalitions for a fixed input.
pub trait Coalition {
    fn n_features(&self) -> usize;
    fn value(&self, x: &[f64], known: &[bool]) -> f64;
}

/// Path-conditional semantics averaged over an ensemble.
pub struct PathConditional<'a> {
    pub trees: &'a [Node],
    pub n_features: usize,
}

impl Coalition for PathConditional<'_> {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn value(&self, x: &[f64], known: &[bool]) -> f64 {
        running_mean(self.trees.iter().map(|t| conditional_expectation(t, x, known)))
    }
}

/// Background-mean substitution: unknown features take each background
/// row's values in turn and the outputs are averaged.
pub struct Interventional<'a, M: Predict> {
    pub model: &'a M,
    pub background: &'a [Vec<f64>],
}

impl<M: Predict> Coalition for Interventional<'_, M> {
    fn n_features(&self) -> usize {
        self.model.n_features()
    }

    fn value(&self, x: &[f64], known: &[bool]) -> f64 {
        let mut z = vec![0.0; x.len()];
        let mut total = 0.0;
        for b in self.background {
            for i in 0..x.len() {
                z[i] = if known[i] { x[i] } else { b[i] };
            }
            total += self.model.predict_row(&z);
        }
        total / self.background.len() as f64
    }
}

/// Shapley values by enumerating all `2^p` coalitions.
pub fn shapley_bruteforce(game: &impl Coalition, x: &[f64]) -> Result<ShapExplanation, ExplainError> {
    let p = game.n_features();
    if p > MAX_EXACT_FEATURES {
        return Err(ExplainError::TooManyFeaturesForExact { got: p, max: MAX_EXACT_FEATURES });
    }
    check_width(p, x)?;
    let subsets = 1usize << p;
    let mut known = vec![false; p];
    let values: Vec<f64> = (0..subsets)
        .map(|mask| {
            for (i, k) in known.iter_mut().enumerate() {
                *k = mask >> i & 1 == 1;
            }
            game.value(x, &known)
        })
        .collect();
    // weight[s] = s! (p - s - 1)! / p!
    let mut fact = vec![1.0f64; p + 1];
    for k in 1..=p {
        fact[k] = fact[k - 1] * k as f64;
    }
    let weight: Vec<f64> = (0..p).map(|s| fact[s] * fact[p - s - 1] / fact[p]).collect();
    let mut phi = vec![0.0; p];
    for (i, out) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in 0..subsets {
            if mask & bit == 0 {
                acc += weight[mask.count_ones() as usize] * (values[mask | bit] - values[mask]);
            }
        }
        *out = acc;
    }
    Ok(ShapExplanation { base_value: values[0], phi, prediction: values[subsets - 1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::boxed::Box;

    fn stump(a: f64, ca: usize, b: f64, cb: usize) -> Node {
        Node::Internal {
            feature: 0,
            threshold: 0.5,
            left: Box::new(Node::Leaf { prediction: a, count: ca }),
            right: Box::new(Node::Leaf { prediction: b, count: cb }),
            mean: (a * ca as f64 + b * cb as f64) / (ca + cb) as f64,
            count: ca + cb,
        }
    }

    #[test]
    fn stump_expectations() {
        let t = stump(2.0, 3, 10.0, 1);
        assert_eq!(conditional_expectation(&t, &[0.0], &[false]), (3.0 * 2.0 + 10.0) / 4.0);
        assert_eq!(conditional_expectation(&t, &[0.0], &[true]), 2.0);
        assert_eq!(conditional_expectation(&t, &[1.0], &[true]), 10.0);
    }

    struct Additive;
    impl Predict for Additive {
        fn n_features(&self) -> usize {
            2
        }
        fn predict_row(&self, r: &[f64]) -> f64 {
            r[0] + r[1]
        }
    }

    #[test]
    fn additive_model_substitution() {
        let bg = [vec![1.0, 4.0], vec![3.0, 0.0]];
        let game = Interventional { model: &Additive, background: &bg };
        let e = shapley_bruteforce(&game, &[5.0, 7.0]).unwrap();
        assert!((e.phi[0] - 3.0).abs() < 1e-12);
        assert!((e.phi[1] - 5.0).abs() < 1e-12);
        assert!(e.local_accuracy_error() < 1e-12);
    }

    #[test]
    fn one_feature_gets_everything() {
        let t = [stump(2.0, 3, 10.0, 1)];
        let game = PathConditional { trees: &t, n_features: 1 };
        let e = shapley_bruteforce(&game, &[1.0]).unwrap();
        assert_eq!(e.phi[0], e.prediction - e.base_value);
    }

    #[test]
    fn unused_feature_is_dummy() {
        let t = [stump(2.0, 3, 10.0, 1)];
        let game = PathConditional { trees: &t, n_features: 3 };
        let e = shapley_bruteforce(&game, &[1.0, 9.0, -9.0]).unwrap();
        assert_eq!((e.phi[1], e.phi[2]), (0.0, 0.0));
    }

    #[test]
    fn too_many_features() {
        let t = [Node::Leaf { prediction: 0.0, count: 1 }];
        let game = PathConditional { trees: &t, n_features: 16 };
        assert_eq!(
            shapley_bruteforce(&game, &[0.0; 16]),
            Err(ExplainError::TooManyFeaturesForExact { got: 16, max: 15 })
        );
    }
}
