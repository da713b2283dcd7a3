//! SURF* feature weighting, a Relief-family algorithm.
//!
//! Every pair of instances within the average pairwise distance contributes a
//! standard Relief update (misses raise the weight of features where the pair
//! differs, hits lower it); pairs beyond the threshold contribute with the
//! update inverted. Accumulated weights are normalized by the total update
//! count so they stay comparable across dataset sizes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Label;
use crate::util::DenseMatrix;

#[derive(Debug, Error)]
pub enum SurfError {
    #[error("SURF* needs both classes present")]
    SingleClass,
    #[error("SURF* needs at least 2 rows")]
    TooFewRows,
}

/// Fitted SURF* weights and the top-k selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfStarModel {
    pub weights: Vec<f64>,
    /// Selected feature indices, highest weight first (ties to lower index).
    pub selected: Vec<usize>,
    pub top_k: usize,
}

impl SurfStarModel {
    /// Keeps the selected columns, in the original feature order.
    pub fn apply(&self, rows: &DenseMatrix) -> DenseMatrix {
        let mut keep = self.selected.clone();
        keep.sort_unstable();
        rows.select_columns(&keep)
    }

    /// Selected indices in original feature order (projection order).
    pub fn kept_in_feature_order(&self) -> Vec<usize> {
        let mut keep = self.selected.clone();
        keep.sort_unstable();
        keep
    }
}

/// Computes SURF* weights on training rows and selects the top `k` features.
///
/// Feature differences are range-normalized; distances are Manhattan sums of
/// those normalized differences, so weights are invariant under shifting a
/// feature by a constant. Deterministic given the input order.
pub fn fit_surf_star(
    train: &DenseMatrix,
    labels: &[Label],
    k: usize,
) -> Result<SurfStarModel, SurfError> {
    let n = train.rows;
    let f = train.cols;
    if n < 2 {
        return Err(SurfError::TooFewRows);
    }
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    if pos == 0 || pos == n {
        return Err(SurfError::SingleClass);
    }

    // per-feature ranges for diff normalization; zero-range features never
    // contribute to distances or updates
    let mut lo = vec![f64::INFINITY; f];
    let mut hi = vec![f64::NEG_INFINITY; f];
    for r in 0..n {
        for (c, &v) in train.row(r).iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    let inv_range: Vec<f64> =
        lo.iter().zip(&hi).map(|(&l, &h)| if h > l { 1.0 / (h - l) } else { 0.0 }).collect();

    let dist = |a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for c in 0..f {
            acc += (a[c] - b[c]).abs() * inv_range[c];
        }
        acc
    };

    // threshold: mean pairwise distance
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            total += dist(train.row(i), train.row(j));
            pairs += 1;
        }
    }
    let threshold = total / pairs as f64;

    let mut weights = vec![0.0; f];
    let mut updates = 0usize;
    for i in 0..n {
        let xi = train.row(i);
        for j in 0..n {
            if j == i {
                continue;
            }
            let xj = train.row(j);
            let d = dist(xi, xj);
            if d == threshold {
                continue;
            }
            // near: miss +diff, hit -diff; far: the update is inverted
            let hit = labels[j] == labels[i];
            let sign = match (d < threshold, hit) {
                (true, true) => -1.0,
                (true, false) => 1.0,
                (false, true) => 1.0,
                (false, false) => -1.0,
            };
            updates += 1;
            for c in 0..f {
                weights[c] += sign * (xi[c] - xj[c]).abs() * inv_range[c];
            }
        }
    }
    if updates > 0 {
        for w in &mut weights {
            *w /= updates as f64;
        }
    }

    let top_k = k.min(f);
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| {
        weights[b].partial_cmp(&weights[a]).expect("finite weights").then(a.cmp(&b))
    });
    let selected = order[..top_k].to_vec();
    Ok(SurfStarModel { weights, selected, top_k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Literal transcription of the scoring definition, kept deliberately
    /// naive: recompute everything per ordered pair.
    fn brute_force_weights(rows: &[Vec<f64>], labels: &[Label]) -> Vec<f64> {
        let n = rows.len();
        let f = rows[0].len();
        let mut lo = vec![f64::INFINITY; f];
        let mut hi = vec![f64::NEG_INFINITY; f];
        for r in rows {
            for c in 0..f {
                lo[c] = lo[c].min(r[c]);
                hi[c] = hi[c].max(r[c]);
            }
        }
        let diff = |a: &Vec<f64>, b: &Vec<f64>, c: usize| {
            if hi[c] > lo[c] {
                (a[c] - b[c]).abs() / (hi[c] - lo[c])
            } else {
                0.0
            }
        };
        let dist = |a: &Vec<f64>, b: &Vec<f64>| (0..f).map(|c| diff(a, b, c)).sum::<f64>();
        let mut total = 0.0;
        let mut count = 0;
        for i in 0..n {
            for j in i + 1..n {
                total += dist(&rows[i], &rows[j]);
                count += 1;
            }
        }
        let threshold = total / count as f64;
        let mut w = vec![0.0; f];
        let mut updates = 0usize;
        for i in 0..n {
            for j in 0..n {
                if i == j || dist(&rows[i], &rows[j]) == threshold {
                    continue;
                }
                let near = dist(&rows[i], &rows[j]) < threshold;
                let hit = labels[i] == labels[j];
                let sign = if near == hit { -1.0 } else { 1.0 };
                updates += 1;
                for c in 0..f {
                    w[c] += sign * diff(&rows[i], &rows[j], c);
                }
            }
        }
        w.iter().map(|x| x / updates as f64).collect()
    }

    fn ten_sample_dataset() -> (Vec<Vec<f64>>, Vec<Label>) {
        // feature 0 separates the classes perfectly; feature 1 is
        // label-independent (identical distribution in both classes)
        let rows = vec![
            vec![0.000, 0.0],
            vec![0.002, 0.0],
            vec![0.004, 0.0],
            vec![0.001, 1.0],
            vec![0.003, 1.0],
            vec![0.300, 0.0],
            vec![0.302, 0.0],
            vec![0.304, 0.0],
            vec![0.301, 1.0],
            vec![0.303, 1.0],
        ];
        let labels = vec![
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Positive,
        ];
        (rows, labels)
    }

    #[test]
    fn separating_feature_ranked_first_and_matches_brute_force() {
        let (rows, labels) = ten_sample_dataset();
        let m = DenseMatrix::from_rows(&rows);
        let model = fit_surf_star(&m, &labels, 2).unwrap();
        let expected = brute_force_weights(&rows, &labels);
        for (a, b) in model.weights.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(model.selected[0], 0);
        assert!(model.weights[0] > model.weights[1]);
        assert!(model.weights[0] > 0.0);
    }

    #[test]
    fn label_independent_data_scores_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> =
            (0..200).map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let labels: Vec<Label> =
            (0..200).map(|i| if i % 2 == 0 { Label::Positive } else { Label::Negative }).collect();
        let m = DenseMatrix::from_rows(&rows);
        let model = fit_surf_star(&m, &labels, 3).unwrap();
        for w in &model.weights {
            assert!(w.abs() < 0.1, "weight {w} too far from zero");
        }
    }

    #[test]
    fn duplicated_feature_gets_equal_weight() {
        let (mut rows, labels) = ten_sample_dataset();
        for r in &mut rows {
            let v = r[0];
            r.push(v);
        }
        let m = DenseMatrix::from_rows(&rows);
        let model = fit_surf_star(&m, &labels, 3).unwrap();
        assert!((model.weights[0] - model.weights[2]).abs() < 1e-6);
    }

    #[test]
    fn weights_invariant_under_constant_shift() {
        let (rows, labels) = ten_sample_dataset();
        let m = DenseMatrix::from_rows(&rows);
        let base = fit_surf_star(&m, &labels, 2).unwrap();

        let shifted: Vec<Vec<f64>> =
            rows.iter().map(|r| vec![r[0] + 1000.0, r[1]]).collect();
        let ms = DenseMatrix::from_rows(&shifted);
        let shifted_model = fit_surf_star(&ms, &labels, 2).unwrap();
        for (a, b) in base.weights.iter().zip(&shifted_model.weights) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn determinism_and_single_class_error() {
        let (rows, labels) = ten_sample_dataset();
        let m = DenseMatrix::from_rows(&rows);
        let a = fit_surf_star(&m, &labels, 2).unwrap();
        let b = fit_surf_star(&m, &labels, 2).unwrap();
        assert_eq!(a, b);

        let all_pos = vec![Label::Positive; rows.len()];
        assert!(matches!(fit_surf_star(&m, &all_pos, 2), Err(SurfError::SingleClass)));
    }
}
