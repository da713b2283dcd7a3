//! Histogram-binned decision trees, shared by the random forest (Gini
//! classification splits) and gradient boosting (second-order regression
//! splits on logistic-loss gradients).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::util::DenseMatrix;

/// Bins per feature; candidate split thresholds come from feature quantiles.
pub const MAX_BINS: usize = 64;

/// Quantile-binned view of a training matrix. Thresholds are real feature
/// values, so fitted trees predict directly on raw rows.
pub struct BinnedFeatures {
    /// Per feature: ascending upper edges; code k means value <= edges[k]
    /// (the last code covers everything above the last edge).
    pub edges: Vec<Vec<f64>>,
    codes: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

impl BinnedFeatures {
    pub fn build(x: &DenseMatrix) -> Self {
        let rows = x.rows;
        let cols = x.cols;
        let mut edges = Vec::with_capacity(cols);
        for c in 0..cols {
            let mut vals: Vec<f64> = (0..rows).map(|r| x.row(r)[c]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
            vals.dedup();
            let mut e = Vec::new();
            if vals.len() > 1 {
                if vals.len() <= MAX_BINS {
                    // exact: one edge between each pair of distinct values
                    for w in vals.windows(2) {
                        e.push(w[0] + (w[1] - w[0]) / 2.0);
                    }
                } else {
                    for k in 1..MAX_BINS {
                        let q = k as f64 / MAX_BINS as f64;
                        let v = crate::util::quantile_sorted(&vals, q);
                        if e.last().is_none_or(|&last| v > last) {
                            e.push(v);
                        }
                    }
                }
            }
            edges.push(e);
        }
        let mut codes = vec![0u8; rows * cols];
        for r in 0..rows {
            let row = x.row(r);
            for c in 0..cols {
                codes[r * cols + c] = bin_code(&edges[c], row[c]);
            }
        }
        Self { edges, codes, rows, cols }
    }

    #[inline]
    pub fn code(&self, row: usize, col: usize) -> u8 {
        self.codes[row * self.cols + col]
    }
}

fn bin_code(edges: &[f64], v: f64) -> u8 {
    edges.partition_point(|&e| v > e) as u8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// One fitted tree; node 0 is the root. Leaf values are positive-class
/// fractions for classification trees and additive scores for boosting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

pub struct ClassificationParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features sampled per split; 0 means all.
    pub mtry: usize,
}

/// Grows a Gini classification tree over the given row indices.
/// `positive[r]` is the class of training row r.
pub fn grow_classification(
    binned: &BinnedFeatures,
    rows: &mut [usize],
    positive: &[bool],
    params: &ClassificationParams,
    rng: &mut impl Rng,
) -> Tree {
    let mut nodes = Vec::new();
    let mut features: Vec<usize> = (0..binned.cols).collect();
    grow_cls_node(binned, rows, positive, params, rng, &mut nodes, &mut features, 0);
    Tree { nodes }
}

#[allow(clippy::too_many_arguments)]
fn grow_cls_node(
    binned: &BinnedFeatures,
    rows: &mut [usize],
    positive: &[bool],
    params: &ClassificationParams,
    rng: &mut impl Rng,
    nodes: &mut Vec<Node>,
    features: &mut Vec<usize>,
    depth: usize,
) -> usize {
    let n = rows.len();
    let pos = rows.iter().filter(|&&r| positive[r]).count();
    let id = nodes.len();
    nodes.push(Node::Leaf { value: pos as f64 / n as f64 });
    if depth >= params.max_depth || pos == 0 || pos == n || n < 2 * params.min_leaf {
        return id;
    }

    // per-split feature subsample
    let mtry = if params.mtry == 0 { binned.cols } else { params.mtry.min(binned.cols) };
    if mtry < binned.cols {
        features.partial_shuffle(rng, mtry);
    }

    let mut best: Option<(f64, usize, u8)> = None; // (impurity decrease, feature, bin)
    let parent_gini = gini(pos as f64, n as f64);
    for &c in features.iter().take(mtry) {
        let n_bins = binned.edges[c].len() + 1;
        if n_bins < 2 {
            continue;
        }
        let mut count = [0u32; MAX_BINS];
        let mut pos_count = [0u32; MAX_BINS];
        for &r in rows.iter() {
            let b = binned.code(r, c) as usize;
            count[b] += 1;
            pos_count[b] += u32::from(positive[r]);
        }
        let mut left_n = 0u32;
        let mut left_pos = 0u32;
        for b in 0..n_bins - 1 {
            left_n += count[b];
            left_pos += pos_count[b];
            let right_n = n as u32 - left_n;
            if (left_n as usize) < params.min_leaf || (right_n as usize) < params.min_leaf {
                continue;
            }
            if left_n == 0 || right_n == 0 {
                continue;
            }
            let right_pos = pos as u32 - left_pos;
            let w_left = left_n as f64 / n as f64;
            let w_right = right_n as f64 / n as f64;
            let decrease = parent_gini
                - w_left * gini(left_pos as f64, left_n as f64)
                - w_right * gini(right_pos as f64, right_n as f64);
            if decrease > 1e-12 && best.is_none_or(|(d, _, _)| decrease > d) {
                best = Some((decrease, c, b as u8));
            }
        }
    }

    let Some((_, feature, bin)) = best else {
        return id;
    };
    let threshold = binned.edges[feature][bin as usize];
    let split_at = partition_rows(binned, rows, feature, bin);
    let (left_rows, right_rows) = rows.split_at_mut(split_at);
    let left = grow_cls_node(binned, left_rows, positive, params, rng, nodes, features, depth + 1);
    let right = grow_cls_node(binned, right_rows, positive, params, rng, nodes, features, depth + 1);
    nodes[id] = Node::Split { feature, threshold, left, right };
    id
}

fn gini(pos: f64, n: f64) -> f64 {
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

pub struct RegressionParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// L2 regularization on leaf values.
    pub lambda: f64,
}

/// Grows a second-order regression tree: splits maximize the usual
/// G^2/(H + lambda) gain, leaves carry the Newton step -G/(H + lambda).
pub fn grow_regression(
    binned: &BinnedFeatures,
    rows: &mut [usize],
    grad: &[f64],
    hess: &[f64],
    params: &RegressionParams,
) -> Tree {
    let mut nodes = Vec::new();
    grow_reg_node(binned, rows, grad, hess, params, &mut nodes, 0);
    Tree { nodes }
}

fn grow_reg_node(
    binned: &BinnedFeatures,
    rows: &mut [usize],
    grad: &[f64],
    hess: &[f64],
    params: &RegressionParams,
    nodes: &mut Vec<Node>,
    depth: usize,
) -> usize {
    let n = rows.len();
    let g_total: f64 = rows.iter().map(|&r| grad[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| hess[r]).sum();
    let id = nodes.len();
    nodes.push(Node::Leaf { value: -g_total / (h_total + params.lambda) });
    if depth >= params.max_depth || n < 2 * params.min_leaf {
        return id;
    }

    let parent_score = g_total * g_total / (h_total + params.lambda);
    let mut best: Option<(f64, usize, u8)> = None;
    for c in 0..binned.cols {
        let n_bins = binned.edges[c].len() + 1;
        if n_bins < 2 {
            continue;
        }
        let mut g_bins = [0.0f64; MAX_BINS];
        let mut h_bins = [0.0f64; MAX_BINS];
        let mut c_bins = [0u32; MAX_BINS];
        for &r in rows.iter() {
            let b = binned.code(r, c) as usize;
            g_bins[b] += grad[r];
            h_bins[b] += hess[r];
            c_bins[b] += 1;
        }
        let mut gl = 0.0;
        let mut hl = 0.0;
        let mut nl = 0u32;
        for b in 0..n_bins - 1 {
            gl += g_bins[b];
            hl += h_bins[b];
            nl += c_bins[b];
            let nr = n as u32 - nl;
            if (nl as usize) < params.min_leaf || (nr as usize) < params.min_leaf {
                continue;
            }
            let gr = g_total - gl;
            let hr = h_total - hl;
            let gain = gl * gl / (hl + params.lambda) + gr * gr / (hr + params.lambda)
                - parent_score;
            if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                best = Some((gain, c, b as u8));
            }
        }
    }

    let Some((_, feature, bin)) = best else {
        return id;
    };
    let threshold = binned.edges[feature][bin as usize];
    let split_at = partition_rows(binned, rows, feature, bin);
    let (left_rows, right_rows) = rows.split_at_mut(split_at);
    let left = grow_reg_node(binned, left_rows, grad, hess, params, nodes, depth + 1);
    let right = grow_reg_node(binned, right_rows, grad, hess, params, nodes, depth + 1);
    nodes[id] = Node::Split { feature, threshold, left, right };
    id
}

/// Stable partition of `rows` by bin code; returns the split point.
fn partition_rows(binned: &BinnedFeatures, rows: &mut [usize], feature: usize, bin: u8) -> usize {
    let mut left = Vec::with_capacity(rows.len());
    let mut right = Vec::with_capacity(rows.len());
    for &r in rows.iter() {
        if binned.code(r, feature) <= bin {
            left.push(r);
        } else {
            right.push(r);
        }
    }
    let split = left.len();
    rows[..split].copy_from_slice(&left);
    rows[split..].copy_from_slice(&right);
    split
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binning_exact_for_few_values() {
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![5.0], vec![2.0]]);
        let b = BinnedFeatures::build(&x);
        assert_eq!(b.edges[0], vec![1.5, 3.5]);
        assert_eq!(b.code(0, 0), 0);
        assert_eq!(b.code(1, 0), 1);
        assert_eq!(b.code(2, 0), 2);
    }

    #[test]
    fn classification_tree_separates_clean_data() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i * 7 % 13) as f64]).collect();
        let positive: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let x = DenseMatrix::from_rows(&rows);
        let binned = BinnedFeatures::build(&x);
        let mut idx: Vec<usize> = (0..40).collect();
        let params = ClassificationParams { max_depth: 8, min_leaf: 1, mtry: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = grow_classification(&binned, &mut idx, &positive, &params, &mut rng);
        for (i, row) in rows.iter().enumerate() {
            let p = tree.predict(row);
            assert_eq!(p > 0.5, positive[i], "row {i}");
        }
    }

    #[test]
    fn regression_tree_fits_step_gradients() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let x = DenseMatrix::from_rows(&rows);
        let binned = BinnedFeatures::build(&x);
        let grad: Vec<f64> = (0..30).map(|i| if i < 15 { -1.0 } else { 1.0 }).collect();
        let hess = vec![1.0; 30];
        let mut idx: Vec<usize> = (0..30).collect();
        let params = RegressionParams { max_depth: 2, min_leaf: 1, lambda: 0.0 };
        let tree = grow_regression(&binned, &mut idx, &grad, &hess, &params);
        // the Newton step pushes the left half up (+1) and the right down (-1)
        assert!(tree.predict(&[3.0]) > 0.9);
        assert!(tree.predict(&[25.0]) < -0.9);
    }

    #[test]
    fn min_leaf_respected() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let positive: Vec<bool> = (0..10).map(|i| i == 9).collect();
        let x = DenseMatrix::from_rows(&rows);
        let binned = BinnedFeatures::build(&x);
        let mut idx: Vec<usize> = (0..10).collect();
        let params = ClassificationParams { max_depth: 10, min_leaf: 3, mtry: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = grow_classification(&binned, &mut idx, &positive, &params, &mut rng);
        // the lone positive cannot be isolated in a leaf smaller than 3
        for node in &tree.nodes {
            if let Node::Leaf { value } = node {
                assert!(*value <= 1.0 / 3.0 + 1e-12);
            }
        }
    }
}
