//! Gradient boosting on logistic loss: stagewise shallow regression trees on
//! the loss gradients, with Newton-step leaf values and shrinkage.

use serde::{Deserialize, Serialize};

use crate::util::{sigmoid, DenseMatrix};

use super::tree::{grow_regression, BinnedFeatures, RegressionParams, Tree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub base_score: f64,
    pub shrinkage: f64,
    pub trees: Vec<Tree>,
}

pub struct BoostParams {
    pub rounds: usize,
    pub depth: usize,
    pub shrinkage: f64,
    pub lambda: f64,
}

pub fn fit_boost(x: &DenseMatrix, positive: &[bool], params: &BoostParams) -> BoostModel {
    let n = x.rows;
    let binned = BinnedFeatures::build(x);
    let pos = positive.iter().filter(|&&p| p).count() as f64;
    let prior = (pos / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (prior / (1.0 - prior)).ln();

    let reg = RegressionParams { max_depth: params.depth, min_leaf: 1, lambda: params.lambda };
    let mut score = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut rows: Vec<usize> = (0..n).collect();

    for _ in 0..params.rounds {
        for i in 0..n {
            let p = sigmoid(score[i]);
            grad[i] = p - if positive[i] { 1.0 } else { 0.0 };
            hess[i] = (p * (1.0 - p)).max(1e-12);
        }
        rows.clear();
        rows.extend(0..n);
        let tree = grow_regression(&binned, &mut rows, &grad, &hess, &reg);
        for i in 0..n {
            score[i] += params.shrinkage * tree.predict(x.row(i));
        }
        trees.push(tree);
    }
    BoostModel { base_score, shrinkage: params.shrinkage, trees }
}

impl BoostModel {
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        let mut z = self.base_score;
        for t in &self.trees {
            z += self.shrinkage * t.predict(row);
        }
        sigmoid(z)
    }
}
