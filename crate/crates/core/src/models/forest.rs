//! Random forest: bootstrap-sampled Gini trees with per-split feature
//! subsampling; probabilities are the mean of per-tree leaf class
//! frequencies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::{derive_seed, DenseMatrix};

use super::tree::{grow_classification, BinnedFeatures, ClassificationParams, Tree};

const SEED_STREAM_RF: u64 = 0x5246; // "RF"

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

pub fn fit_forest(
    x: &DenseMatrix,
    positive: &[bool],
    params: &ForestParams,
    seed: u64,
) -> ForestModel {
    let n = x.rows;
    let binned = BinnedFeatures::build(x);
    let mtry = (x.cols as f64).sqrt().floor().max(1.0) as usize;
    let cls = ClassificationParams { max_depth: params.max_depth, min_leaf: params.min_leaf, mtry };

    let trees = (0..params.trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SEED_STREAM_RF, t as u64));
            let mut rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            grow_classification(&binned, &mut rows, positive, &cls, &mut rng)
        })
        .collect();
    ForestModel { trees }
}

impl ForestModel {
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / self.trees.len() as f64
    }
}
