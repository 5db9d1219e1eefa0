//! Global importance: mean absolute attribution and the signed table.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ExplainError, ShapExplanation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedEntry {
    pub sample: usize,
    pub feature: usize,
    pub phi: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub mean_abs: Vec<f64>,
    /// Feature indices by descending mean |phi|, ties by index.
    pub ranking: Vec<usize>,
    /// Pearson correlation of feature value against phi; `None` when either
    /// side is constant.
    pub direction: Vec<Option<f64>>,
    pub table: Vec<SignedEntry>,
}

/// Aggregates per-sample explanations. `values[s]` are the feature values
/// of sample `s`.
pub fn aggregate(explanations: &[ShapExplanation], values: &[Vec<f64>]) -> Result<GlobalImportance, ExplainError> {
    let first = explanations.first().ok_or(ExplainError::NoExplanations)?;
    let p = first.phi.len();
    if values.len() != explanations.len() {
        return Err(ExplainError::WidthMismatch { expected: explanations.len(), got: values.len() });
    }
    for (e, v) in explanations.iter().zip(values) {
        super::check_width(p, &e.phi)?;
        super::check_width(p, v)?;
    }
    let n = explanations.len() as f64;
    let mut mean_abs = vec![0.0; p];
    for e in explanations {
        for (m, v) in mean_abs.iter_mut().zip(&e.phi) {
            *m += v.abs();
        }
    }
    mean_abs.iter_mut().for_each(|m| *m /= n);
    let mut ranking: Vec<usize> = (0..p).collect();
    ranking.sort_by(|&a, &b| mean_abs[b].total_cmp(&mean_abs[a]).then(a.cmp(&b)));
    let direction = (0..p)
        .map(|f| {
            let xs: Vec<f64> = values.iter().map(|v| v[f]).collect();
            let ys: Vec<f64> = explanations.iter().map(|e| e.phi[f]).collect();
            pearson(&xs, &ys)
        })
        .collect();
    let mut table = Vec::with_capacity(explanations.len() * p);
    for (s, (e, v)) in explanations.iter().zip(values).enumerate() {
        for (f, (&phi, &value)) in e.phi.iter().zip(v).enumerate() {
            table.push(SignedEntry { sample: s, feature: f, phi, value });
        }
    }
    Ok(GlobalImportance { mean_abs, ranking, direction, table })
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / libm::sqrt(sxx * syy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(phi: Vec<f64>) -> ShapExplanation {
        ShapExplanation { base_value: 0.0, prediction: phi.iter().sum(), phi }
    }

    #[test]
    fn single_sample_ranks_by_abs() {
        let g = aggregate(&[ex(vec![0.5, -3.0, 1.0])], &[vec![0.0; 3]]).unwrap();
        assert_eq!(g.ranking, vec![1, 2, 0]);
        assert_eq!(g.table.len(), 3);
    }

    #[test]
    fn opposite_signs_do_not_cancel() {
        let g = aggregate(&[ex(vec![2.0, 0.0]), ex(vec![-2.0, 0.0])], &[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(g.mean_abs, vec![2.0, 0.0]);
        assert_eq!(g.direction[0], Some(1.0));
        assert_eq!(g.direction[1], None);
    }

    #[test]
    fn zero_phi_ties_by_index() {
        let g = aggregate(&[ex(vec![0.0; 4])], &[vec![0.0; 4]]).unwrap();
        assert_eq!(g.ranking, vec![0, 1, 2, 3]);
    }

    #[test]
    fn width_errors() {
        assert_eq!(aggregate(&[], &[]), Err(ExplainError::NoExplanations));
        assert!(aggregate(&[ex(vec![0.0; 2]), ex(vec![0.0; 3])], &[vec![0.0; 2], vec![0.0; 3]]).is_err());
    }
}
