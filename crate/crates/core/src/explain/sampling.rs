//! Permutation-sampling Shapley estimator with background substitution.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_width, ExplainError, ShapExplanation};
use crate::learn::Predict;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingEstimate {
    /// `base_value` is the mean output over the background rows actually
    /// drawn, so local accuracy holds exactly for the estimate.
    pub explanation: ShapExplanation,
    pub std_err: Vec<f64>,
    pub permutations: usize,
}

/// Each permutation draws one background row, then switches features to
/// `x` in permutation order and credits each switch with the change in
/// output. Averages over permutations are unbiased for the
/// background-substitution Shapley values.
pub fn shapley_sampling<M: Predict + ?Sized>(
    model: &M,
    x: &[f64],
    background: &[Vec<f64>],
    permutations: usize,
    seed: u64,
) -> Result<SamplingEstimate, ExplainError> {
    let p = model.n_features();
    check_width(p, x)?;
    if background.is_empty() {
        return Err(ExplainError::EmptyBackground);
    }
    if permutations == 0 {
        return Err(ExplainError::NoPermutations);
    }
    for b in background {
        check_width(p, b)?;
    }
    let mut r = rng::seeded(seed);
    let mut order: Vec<usize> = (0..p).collect();
    let mut mean = vec![0.0; p];
    let mut m2 = vec![0.0; p];
    let mut base = 0.0;
    let mut z = vec![0.0; p];
    for k in 0..permutations {
        order.shuffle(&mut r);
        let b = &background[r.random_range(0..background.len())];
        z.copy_from_slice(b);
        let mut prev = model.predict_row(&z);
        base += (prev - base) / (k + 1) as f64;
        for &f in &order {
            z[f] = x[f];
            let cur = model.predict_row(&z);
            let delta = cur - prev;
            prev = cur;
            let d0 = delta - mean[f];
            mean[f] += d0 / (k + 1) as f64;
            m2[f] += d0 * (delta - mean[f]);
        }
    }
    let n = permutations as f64;
    let std_err = m2
        .iter()
        .map(|s| if permutations > 1 { libm::sqrt(s / (n - 1.0) / n) } else { f64::INFINITY })
        .collect();
    Ok(SamplingEstimate {
        explanation: ShapExplanation { base_value: base, phi: mean, prediction: model.predict_row(x) },
        std_err,
        permutations,
    })
}
