//! Exact Shapley values for trees under path-conditional expectations,
//! polynomial in tree depth. The path bookkeeping follows the classic
//! extend/unwind recursion over the features seen on the way to each leaf.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_width, ExplainError, ShapExplanation};
use crate::learn::forest::running_mean;
use crate::learn::{ForestModel, Node};

#[derive(Clone, Copy, Default)]
struct PathElement {
    feature: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    weight: f64,
}

/// Forest attribution: the per-tree values averaged over trees.
pub fn tree_shap(forest: &ForestModel, x: &[f64]) -> Result<ShapExplanation, ExplainError> {
    check_width(forest.n_features, x)?;
    let p = forest.n_features;
    let mut phi = vec![0.0; p];
    let mut tree_phi = vec![0.0; p];
    let mut bases = Vec::with_capacity(forest.trees.len());
    for (t, tree) in forest.trees.iter().enumerate() {
        tree_phi.iter_mut().for_each(|v| *v = 0.0);
        bases.push(tree_shap_node(tree, x, &mut tree_phi));
        let k = (t + 1) as f64;
        for (acc, v) in phi.iter_mut().zip(&tree_phi) {
            *acc += (v - *acc) / k;
        }
    }
    let prediction = running_mean(forest.trees.iter().map(|t| t.predict(x)));
    Ok(ShapExplanation { base_value: running_mean(bases.into_iter()), phi, prediction })
}

/// Adds one tree's attributions for `x` into `phi` and returns its base
/// value (the count-weighted mean over leaves).
pub fn tree_shap_node(root: &Node, x: &[f64], phi: &mut [f64]) -> f64 {
    let depth = root.depth();
    let mut buf = vec![PathElement::default(); (depth + 2) * (depth + 3) / 2];
    recurse(root, x, phi, &mut buf, 0, 0, 1.0, 1.0, None);
    base_value(root)
}

fn base_value(node: &Node) -> f64 {
    match node {
        Node::Leaf { prediction, .. } => *prediction,
        Node::Internal { left, right, .. } => {
            let (cl, cr) = (left.count() as f64, right.count() as f64);
            (cl * base_value(left) + cr * base_value(right)) / (cl + cr)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    node: &Node,
    x: &[f64],
    phi: &mut [f64],
    buf: &mut [PathElement],
    parent_start: usize,
    unique_depth: usize,
    zero_fraction: f64,
    one_fraction: f64,
    feature: Option<usize>,
) {
    // Each level gets its own copy of the parent path, stacked in `buf`.
    let start = parent_start + unique_depth;
    buf.copy_within(parent_start..start, start);
    let path = &mut buf[start..];
    extend(path, unique_depth, zero_fraction, one_fraction, feature);
    let mut unique_depth = unique_depth;

    match node {
        Node::Leaf { prediction, .. } => {
            for i in 1..=unique_depth {
                let w = unwound_sum(path, unique_depth, i);
                let el = path[i];
                if let Some(f) = el.feature {
                    phi[f] += w * (el.one_fraction - el.zero_fraction) * prediction;
                }
            }
        }
        Node::Internal { feature: split, threshold, left, right, .. } => {
            let (hot, cold) = if x[*split] <= *threshold { (left, right) } else { (right, left) };
            let cover = (left.count() + right.count()) as f64;
            let hot_zero = hot.count() as f64 / cover;
            let cold_zero = cold.count() as f64 / cover;
            let (mut incoming_zero, mut incoming_one) = (1.0, 1.0);
            if let Some(k) = (1..=unique_depth).find(|&k| path[k].feature == Some(*split)) {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind(path, unique_depth, k);
                unique_depth -= 1;
            }
            recurse(hot, x, phi, buf, start, unique_depth + 1, hot_zero * incoming_zero, incoming_one, Some(*split));
            recurse(cold, x, phi, buf, start, unique_depth + 1, cold_zero * incoming_zero, 0.0, Some(*split));
        }
    }
}

fn extend(path: &mut [PathElement], d: usize, zero_fraction: f64, one_fraction: f64, feature: Option<usize>) {
    path[d] = PathElement { feature, zero_fraction, one_fraction, weight: if d == 0 { 1.0 } else { 0.0 } };
    let df = (d + 1) as f64;
    for i in (0..d).rev() {
        path[i + 1].weight += one_fraction * path[i].weight * (i + 1) as f64 / df;
        path[i].weight = zero_fraction * path[i].weight * (d - i) as f64 / df;
    }
}

fn unwind(path: &mut [PathElement], d: usize, k: usize) {
    let one = path[k].one_fraction;
    let zero = path[k].zero_fraction;
    let df = (d + 1) as f64;
    let mut next_one = path[d].weight;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one * df / ((i + 1) as f64 * one);
            next_one = tmp - path[i].weight * zero * (d - i) as f64 / df;
        } else {
            path[i].weight = path[i].weight * df / (zero * (d - i) as f64);
        }
    }
    for i in k..d {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

/// Total permutation weight of the path with element `k` removed.
fn unwound_sum(path: &[PathElement], d: usize, k: usize) -> f64 {
    let one = path[k].one_fraction;
    let zero = path[k].zero_fraction;
    let df = (d + 1) as f64;
    let mut next_one = path[d].weight;
    let mut total = 0.0;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = next_one * df / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].weight - tmp * zero * (d - i) as f64 / df;
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((d - i) as f64 / df);
        }
    }
    total
}
