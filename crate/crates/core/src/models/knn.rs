//! K-nearest-neighbor classifier: stores the training set, votes by the
//! fraction of positive neighbors.

use serde::{Deserialize, Serialize};

use crate::util::{euclidean_sq, DenseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: DenseMatrix,
    pub positive: Vec<bool>,
}

pub fn fit_knn(x: &DenseMatrix, positive: &[bool], k: usize) -> KnnModel {
    KnnModel { k: k.min(x.rows).max(1), x: x.clone(), positive: positive.to_vec() }
}

impl KnnModel {
    /// Positive-class probability: positive fraction among the k nearest
    /// training points. Distance ties break to the lower training index.
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        let mut dists: Vec<(f64, usize)> = (0..self.x.rows)
            .map(|r| (euclidean_sq(self.x.row(r), row), r))
            .collect();
        let k = self.k.min(dists.len());
        dists.select_nth_unstable_by(k - 1, |a, b| {
            a.partial_cmp(b).expect("finite distances")
        });
        // re-sort the selected prefix for a deterministic tie boundary
        dists[..k].sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pos = dists[..k].iter().filter(|&&(_, r)| self.positive[r]).count();
        pos as f64 / k as f64
    }
}
