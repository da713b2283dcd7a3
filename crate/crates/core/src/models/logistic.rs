//! L2-regularized logistic regression fitted by damped Newton iteration,
//! run until the objective gradient norm drops below the tolerance.

use serde::{Deserialize, Serialize};

use crate::util::{sigmoid, solve_linear, DenseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Gradient norm reached by the optimizer.
    pub grad_norm: f64,
}

/// Objective: mean log-loss + (l2/2) ||w||^2. The intercept is not penalized.
pub fn fit_logistic(
    x: &DenseMatrix,
    positive: &[bool],
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> LogisticModel {
    let n = x.rows;
    let f = x.cols;
    let dim = f + 1; // weights + bias, bias last
    let mut theta = vec![0.0; dim];
    let y: Vec<f64> = positive.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect();

    let loss = |theta: &[f64]| -> f64 {
        let mut acc = 0.0;
        for r in 0..n {
            let z = margin(x.row(r), theta);
            let t = y[r];
            acc += softplus(z) - t * z;
        }
        acc / n as f64
            + 0.5 * l2 * theta[..f].iter().map(|w| w * w).sum::<f64>()
    };

    let mut grad_norm = f64::INFINITY;
    for _ in 0..max_iter {
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        for r in 0..n {
            let row = x.row(r);
            let p = sigmoid(margin(row, theta.as_slice()));
            let err = p - y[r];
            let s = (p * (1.0 - p)).max(1e-12);
            for i in 0..f {
                grad[i] += err * row[i];
                for j in i..f {
                    hess[i * dim + j] += s * row[i] * row[j];
                }
                hess[i * dim + f] += s * row[i];
            }
            grad[f] += err;
            hess[f * dim + f] += s;
        }
        let inv_n = 1.0 / n as f64;
        for g in &mut grad {
            *g *= inv_n;
        }
        for i in 0..dim {
            for j in i..dim {
                hess[i * dim + j] *= inv_n;
                hess[j * dim + i] = hess[i * dim + j];
            }
        }
        for i in 0..f {
            grad[i] += l2 * theta[i];
            hess[i * dim + i] += l2;
        }
        hess[f * dim + f] += 1e-12; // keep the system solvable on tiny data

        grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm < tol {
            break;
        }

        let mut rhs = grad.clone();
        let step = solve_linear(&mut hess, &mut rhs, dim);

        // backtracking in case Newton overshoots on near-separable data
        let base_loss = loss(&theta);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate: Vec<f64> =
                theta.iter().zip(&step).map(|(t, s)| t - scale * s).collect();
            if loss(&candidate) <= base_loss {
                theta = candidate;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    LogisticModel { weights: theta[..f].to_vec(), bias: theta[f], grad_norm }
}

fn margin(row: &[f64], theta: &[f64]) -> f64 {
    let f = theta.len() - 1;
    let mut z = theta[f];
    for i in 0..f {
        z += theta[i] * row[i];
    }
    z
}

/// log(1 + e^z), numerically stable.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticModel {
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        let mut z = self.bias;
        for (w, v) in self.weights.iter().zip(row) {
            z += w * v;
        }
        sigmoid(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (DenseMatrix, Vec<bool>) {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let c = if i < 10 { -2.0 } else { 2.0 };
                vec![c + (i % 5) as f64 * 0.1, c * 0.5 - (i % 3) as f64 * 0.1]
            })
            .collect();
        (DenseMatrix::from_rows(&rows), (0..20).map(|i| i >= 10).collect())
    }

    #[test]
    fn separable_data_trains_to_perfect_accuracy() {
        let (x, y) = separable();
        let m = fit_logistic(&x, &y, 1e-3, 1e-6, 200);
        assert!(m.grad_norm < 1e-6, "gradient norm {}", m.grad_norm);
        for r in 0..x.rows {
            assert_eq!(m.predict_one(x.row(r)) > 0.5, y[r]);
        }
    }

    #[test]
    fn probability_is_half_on_the_decision_boundary() {
        let (x, y) = separable();
        let m = fit_logistic(&x, &y, 1e-3, 1e-6, 200);
        // construct a point on the fitted boundary: w.x + b = 0
        let w = &m.weights;
        assert!(w[0].abs() > 1e-8);
        let x1 = 0.7;
        let x0 = -(m.bias + w[1] * x1) / w[0];
        let p = m.predict_one(&[x0, x1]);
        assert!((p - 0.5).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn stronger_regularization_shrinks_weights() {
        let (x, y) = separable();
        let weak = fit_logistic(&x, &y, 1e-4, 1e-6, 200);
        let strong = fit_logistic(&x, &y, 1.0, 1e-6, 200);
        let norm = |m: &LogisticModel| m.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm(&strong) < norm(&weak));
    }
}
