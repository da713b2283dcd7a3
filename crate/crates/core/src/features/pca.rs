//! Principal component analysis.
//!
//! For moderate feature counts the model comes from a cyclic Jacobi
//! eigendecomposition of the sample covariance matrix; past
//! [`COVARIANCE_FEATURE_LIMIT`] features it switches to orthogonalized power
//! iteration on the centered data, which never materializes the covariance.
//! The two routes agree within 1e-6 and are tested against each other.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::util::DenseMatrix;

/// Feature count above which the covariance matrix is not materialized.
pub const COVARIANCE_FEATURE_LIMIT: usize = 2_000;

/// Eigenvalues below `max_eigenvalue * RANK_EPS` count as numerically zero
/// when deciding the effective rank.
const RANK_EPS: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("component count {requested} exceeds min(rows-1, features) = {max}")]
    TooManyComponents { requested: usize, max: usize },
    #[error("need at least 2 rows to fit a covariance")]
    TooFewRows,
}

/// Fitted PCA basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal basis rows, components x features, sorted by decreasing
    /// explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Components requested; fewer are kept when the data is rank deficient.
    pub requested: usize,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }
}

/// Fits PCA on training rows; `n` is reduced (with a warning) when the data
/// has lower effective rank.
pub fn fit_pca(train: &DenseMatrix, n: usize) -> Result<PcaModel, PcaError> {
    fit_pca_with_limit(train, n, COVARIANCE_FEATURE_LIMIT)
}

/// Same as [`fit_pca`] with an explicit route-switch threshold (exposed so
/// the two routes can be cross-checked).
pub fn fit_pca_with_limit(
    train: &DenseMatrix,
    n: usize,
    covariance_limit: usize,
) -> Result<PcaModel, PcaError> {
    let rows = train.rows;
    let cols = train.cols;
    if rows < 2 {
        return Err(PcaError::TooFewRows);
    }
    let max = (rows - 1).min(cols);
    if n > max {
        return Err(PcaError::TooManyComponents { requested: n, max });
    }

    let mut mean = vec![0.0; cols];
    for r in 0..rows {
        for (m, v) in mean.iter_mut().zip(train.row(r)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }

    let (mut eigvals, mut components) = if cols <= covariance_limit {
        covariance_route(train, &mean, n)
    } else {
        power_iteration_route(train, &mean, n)
    };

    // rank-deficiency: drop numerically-zero directions, warn
    let floor = eigvals.first().copied().unwrap_or(0.0).max(0.0) * RANK_EPS;
    let effective = eigvals.iter().take_while(|&&v| v > floor).count();
    if effective < n {
        log::warn!("pca: rank deficient, keeping {effective} of {n} requested components");
        eigvals.truncate(effective);
        components.truncate(effective);
    }

    Ok(PcaModel { mean, components, explained_variance: eigvals, requested: n })
}

/// Projects rows onto the fitted basis.
pub fn project(model: &PcaModel, rows: &DenseMatrix) -> DenseMatrix {
    let k = model.components.len();
    let mut out = DenseMatrix::zeros(rows.rows, k);
    for r in 0..rows.rows {
        let x = rows.row(r);
        let y = out.row_mut(r);
        for (j, comp) in model.components.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..x.len() {
                acc += (x[i] - model.mean[i]) * comp[i];
            }
            y[j] = acc;
        }
    }
    out
}

/// Dense route: sample covariance + Jacobi eigendecomposition.
fn covariance_route(train: &DenseMatrix, mean: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let rows = train.rows;
    let cols = train.cols;
    let mut cov = vec![0.0; cols * cols];
    for r in 0..rows {
        let x = train.row(r);
        for i in 0..cols {
            let di = x[i] - mean[i];
            let row = &mut cov[i * cols..(i + 1) * cols];
            for (j, c) in row.iter_mut().enumerate().skip(i) {
                *c += di * (x[j] - mean[j]);
            }
        }
    }
    let denom = (rows - 1) as f64;
    for i in 0..cols {
        for j in i..cols {
            let v = cov[i * cols + j] / denom;
            cov[i * cols + j] = v;
            cov[j * cols + i] = v;
        }
    }
    let (eigvals, eigvecs) = jacobi_eigh(&cov, cols);
    // sorted descending; take the top n
    let vals = eigvals[..n].to_vec();
    let comps = eigvecs[..n].to_vec();
    (vals, comps)
}

/// Wide-data route: power iteration with Gram-Schmidt deflation on the
/// centered data matrix.
fn power_iteration_route(train: &DenseMatrix, mean: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let rows = train.rows;
    let cols = train.cols;
    let denom = (rows - 1) as f64;
    let mut comps: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n);

    for k in 0..n {
        // deterministic start: alternating signs, shifted per component
        let mut v: Vec<f64> = (0..cols)
            .map(|i| if (i + k) % 2 == 0 { 1.0 } else { -0.7 } / (1.0 + i as f64 * 1e-3))
            .collect();
        orthogonalize(&mut v, &comps);
        normalize(&mut v);
        let mut lambda = 0.0;
        for _ in 0..2_000 {
            // w = Cov * v without forming Cov: X^T (X v) / (rows - 1)
            let mut xv = vec![0.0; rows];
            for (r, item) in xv.iter_mut().enumerate() {
                let x = train.row(r);
                let mut acc = 0.0;
                for i in 0..cols {
                    acc += (x[i] - mean[i]) * v[i];
                }
                *item = acc;
            }
            let mut w = vec![0.0; cols];
            for r in 0..rows {
                let x = train.row(r);
                let s = xv[r];
                for i in 0..cols {
                    w[i] += (x[i] - mean[i]) * s;
                }
            }
            for wi in &mut w {
                *wi /= denom;
            }
            orthogonalize(&mut w, &comps);
            let new_lambda = norm(&w);
            if new_lambda == 0.0 {
                lambda = 0.0;
                break;
            }
            for wi in &mut w {
                *wi /= new_lambda;
            }
            let delta: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = w;
            let converged = (new_lambda - lambda).abs() <= 1e-12 * new_lambda && delta < 1e-10;
            lambda = new_lambda;
            if converged {
                break;
            }
        }
        vals.push(lambda);
        comps.push(v);
    }
    (vals, comps)
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= dot * bi;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major, n x n).
/// Returns (eigenvalues, eigenvectors-as-rows), sorted by decreasing
/// eigenvalue. Deterministic; accurate to near machine precision.
pub fn jacobi_eigh(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        let scale: f64 = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
        if off.sqrt() <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j].partial_cmp(&a[i * n + i]).expect("finite eigenvalues")
    });
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let eigvecs: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
        .collect();
    (eigvals, eigvecs)
}
