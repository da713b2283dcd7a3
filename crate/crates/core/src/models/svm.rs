//! Soft-margin SVM with an RBF kernel.
//!
//! The hinge-loss dual is solved by sequential minimal optimization with
//! maximal-violating-pair working-set selection, run to a KKT gap below the
//! tolerance. Probabilities come from a logistic map fitted on the training
//! decision values. Training sets beyond `max_train` rows are reduced by a
//! deterministic stratified subsample before solving; pure SMO does not
//! scale past a few thousand rows on one core.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::{derive_seed, euclidean_sq, sigmoid, DenseMatrix};

const SEED_STREAM_SVM: u64 = 0x53564d; // "SVM"

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support: DenseMatrix,
    /// alpha_i * y_i per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    /// Logistic calibration p = sigmoid(a * decision + b).
    pub platt_a: f64,
    pub platt_b: f64,
    pub c: f64,
    pub tol: f64,
}

pub struct SvmParams {
    pub c: f64,
    /// `None` picks 1 / (features * variance of the training values).
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_train: usize,
}

pub fn fit_svm(x: &DenseMatrix, positive: &[bool], params: &SvmParams, seed: u64) -> SvmModel {
    // deterministic stratified subsample when the dual would be too large
    let (x, positive): (DenseMatrix, Vec<bool>) = if x.rows > params.max_train {
        log::warn!(
            "svm: subsampling {} of {} training rows for the dual solver",
            params.max_train,
            x.rows
        );
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SEED_STREAM_SVM, 0));
        let mut pos_idx: Vec<usize> = (0..x.rows).filter(|&r| positive[r]).collect();
        let mut neg_idx: Vec<usize> = (0..x.rows).filter(|&r| !positive[r]).collect();
        pos_idx.shuffle(&mut rng);
        neg_idx.shuffle(&mut rng);
        let take_pos = ((params.max_train * pos_idx.len()) / x.rows).max(1).min(pos_idx.len());
        let take_neg = (params.max_train - take_pos).min(neg_idx.len());
        let mut keep: Vec<usize> =
            pos_idx[..take_pos].iter().chain(neg_idx[..take_neg].iter()).copied().collect();
        keep.sort_unstable();
        (x.select_rows(&keep), keep.iter().map(|&r| positive[r]).collect())
    } else {
        (x.clone(), positive.to_vec())
    };

    let n = x.rows;
    let gamma = params.gamma.unwrap_or_else(|| {
        let mean = x.data.iter().sum::<f64>() / x.data.len() as f64;
        let var = x.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.data.len() as f64;
        if var > 0.0 {
            1.0 / (x.cols as f64 * var)
        } else {
            1.0 / x.cols as f64
        }
    });
    let y: Vec<f64> = positive.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();

    let mut solver = Smo::new(&x, &y, params.c, gamma, params.tol);
    solver.solve();
    let (alpha, bias) = (solver.alpha, solver.bias);

    // keep only the support vectors
    let sv_idx: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    let support = x.select_rows(&sv_idx);
    let coef: Vec<f64> = sv_idx.iter().map(|&i| alpha[i] * y[i]).collect();

    // calibration on the training decision values (no inner CV); targets get
    // the usual smoothing so separable data cannot push the map to infinity
    let decisions: Vec<f64> = (0..n)
        .map(|i| decision_from(&support, &coef, bias, gamma, x.row(i)))
        .collect();
    let (platt_a, platt_b) = fit_platt(&decisions, &positive);

    SvmModel { support, coef, bias, gamma, platt_a, platt_b, c: params.c, tol: params.tol }
}

impl SvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        decision_from(&self.support, &self.coef, self.bias, self.gamma, row)
    }

    pub fn predict_one(&self, row: &[f64]) -> f64 {
        sigmoid(self.platt_a * self.decision(row) + self.platt_b)
    }
}

fn decision_from(support: &DenseMatrix, coef: &[f64], bias: f64, gamma: f64, row: &[f64]) -> f64 {
    let mut acc = bias;
    for (s, &c) in coef.iter().enumerate() {
        acc += c * (-gamma * euclidean_sq(support.row(s), row)).exp();
    }
    acc
}

/// SMO state for the dual problem min 1/2 a^T Q a - e^T a, 0 <= a <= C,
/// with Q_ij = y_i y_j K_ij.
struct Smo<'a> {
    x: &'a DenseMatrix,
    y: &'a [f64],
    c: f64,
    gamma: f64,
    tol: f64,
    alpha: Vec<f64>,
    /// G_i = (Q alpha)_i - 1
    grad: Vec<f64>,
    kdiag: Vec<f64>,
    cache: KernelCache,
    bias: f64,
}

impl<'a> Smo<'a> {
    fn new(x: &'a DenseMatrix, y: &'a [f64], c: f64, gamma: f64, tol: f64) -> Self {
        let n = x.rows;
        Smo {
            x,
            y,
            c,
            gamma,
            tol,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            kdiag: vec![1.0; n], // RBF: K(x, x) = 1
            cache: KernelCache::new(n),
            bias: 0.0,
        }
    }

    fn kernel_row(&mut self, i: usize) -> std::rc::Rc<Vec<f64>> {
        if let Some(row) = self.cache.get(i) {
            return row;
        }
        let xi = self.x.row(i);
        let gamma = self.gamma;
        let row: Vec<f64> =
            (0..self.x.rows).map(|j| (-gamma * euclidean_sq(xi, self.x.row(j))).exp()).collect();
        self.cache.put(i, row)
    }

    fn solve(&mut self) {
        let n = self.x.rows;
        let max_iter = (20 * n).max(20_000);
        let mut final_gap = f64::INFINITY;
        for iter in 0..max_iter {
            // maximal violating pair over -y_i G_i
            let mut i_up = usize::MAX;
            let mut m_up = f64::NEG_INFINITY;
            let mut j_low = usize::MAX;
            let mut m_low = f64::INFINITY;
            for t in 0..n {
                let v = -self.y[t] * self.grad[t];
                let in_up = (self.y[t] > 0.0 && self.alpha[t] < self.c)
                    || (self.y[t] < 0.0 && self.alpha[t] > 0.0);
                let in_low = (self.y[t] < 0.0 && self.alpha[t] < self.c)
                    || (self.y[t] > 0.0 && self.alpha[t] > 0.0);
                if in_up && v > m_up {
                    m_up = v;
                    i_up = t;
                }
                if in_low && v < m_low {
                    m_low = v;
                    j_low = t;
                }
            }
            if m_up.is_finite() && m_low.is_finite() {
                self.bias = (m_up + m_low) / 2.0;
            }
            final_gap = m_up - m_low;
            if final_gap < self.tol || i_up == usize::MAX || j_low == usize::MAX {
                let _ = iter;
                break;
            }

            let (i, j) = (i_up, j_low);
            let ki = self.kernel_row(i);
            let kj = self.kernel_row(j);
            let (yi, yj) = (self.y[i], self.y[j]);
            let (old_ai, old_aj) = (self.alpha[i], self.alpha[j]);

            if (yi - yj).abs() > 0.5 {
                // opposite labels
                let quad = (self.kdiag[i] + self.kdiag[j] + 2.0 * ki[j]).max(1e-12);
                let delta = (-self.grad[i] - self.grad[j]) / quad;
                let diff = old_ai - old_aj;
                let mut ai = old_ai + delta;
                let mut aj = old_aj + delta;
                if diff > 0.0 && aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                } else if diff <= 0.0 && ai < 0.0 {
                    ai = 0.0;
                    aj = -diff;
                }
                if diff > 0.0 {
                    if ai > self.c {
                        ai = self.c;
                        aj = self.c - diff;
                    }
                } else if aj > self.c {
                    aj = self.c;
                    ai = self.c + diff;
                }
                self.alpha[i] = ai;
                self.alpha[j] = aj;
            } else {
                // same labels
                let quad = (self.kdiag[i] + self.kdiag[j] - 2.0 * ki[j]).max(1e-12);
                let delta = (self.grad[i] - self.grad[j]) / quad;
                let sum = old_ai + old_aj;
                let mut ai = old_ai - delta;
                let mut aj = old_aj + delta;
                if sum > self.c {
                    if ai > self.c {
                        ai = self.c;
                        aj = sum - self.c;
                    } else if aj > self.c {
                        aj = self.c;
                        ai = sum - self.c;
                    }
                } else if aj < 0.0 {
                    aj = 0.0;
                    ai = sum;
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = sum;
                }
                self.alpha[i] = ai;
                self.alpha[j] = aj;
            }

            let dai = self.alpha[i] - old_ai;
            let daj = self.alpha[j] - old_aj;
            if dai == 0.0 && daj == 0.0 {
                // numerically stuck pair; accept the current gap
                break;
            }
            for t in 0..n {
                self.grad[t] +=
                    self.y[t] * (yi * dai * ki[t] + yj * daj * kj[t]);
            }
        }
        if final_gap >= self.tol {
            log::warn!("svm: SMO stopped with KKT gap {final_gap:.3e} (tol {:.1e})", self.tol);
        }
    }
}

/// FIFO row cache; kernel rows are the dominant SMO cost.
struct KernelCache {
    rows: Vec<Option<std::rc::Rc<Vec<f64>>>>,
    order: std::collections::VecDeque<usize>,
    capacity: usize,
}

impl KernelCache {
    fn new(n: usize) -> Self {
        // ~128 MB ceiling on cached rows
        let capacity = (128 * 1024 * 1024 / 8 / n.max(1)).clamp(2, n.max(2));
        Self { rows: vec![None; n], order: std::collections::VecDeque::new(), capacity }
    }

    fn get(&self, i: usize) -> Option<std::rc::Rc<Vec<f64>>> {
        self.rows[i].clone()
    }

    fn put(&mut self, i: usize, row: Vec<f64>) -> std::rc::Rc<Vec<f64>> {
        if self.order.len() >= self.capacity {
            if let Some(evict) = self.order.pop_front() {
                self.rows[evict] = None;
            }
        }
        let rc = std::rc::Rc::new(row);
        self.rows[i] = Some(rc.clone());
        self.order.push_back(i);
        rc
    }
}

/// Logistic map on decision values with Platt's smoothed targets.
fn fit_platt(decisions: &[f64], positive: &[bool]) -> (f64, f64) {
    let n = decisions.len();
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = n as f64 - n_pos;
    let t_pos = (n_pos + 1.0) / (n_pos + 2.0);
    let t_neg = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> =
        positive.iter().map(|&p| if p { t_pos } else { t_neg }).collect();

    let mut a = 1.0;
    let mut b = 0.0;
    for _ in 0..100 {
        let mut g = [0.0f64; 2];
        let mut h = [0.0f64; 4];
        for (d, t) in decisions.iter().zip(&targets) {
            let p = sigmoid(a * d + b);
            let err = p - t;
            let s = (p * (1.0 - p)).max(1e-12);
            g[0] += err * d;
            g[1] += err;
            h[0] += s * d * d;
            h[1] += s * d;
            h[3] += s;
        }
        h[0] += 1e-9;
        h[3] += 1e-9;
        h[2] = h[1];
        let det = h[0] * h[3] - h[1] * h[2];
        if det.abs() < 1e-30 {
            break;
        }
        let da = (g[0] * h[3] - g[1] * h[1]) / det;
        let db = (h[0] * g[1] - h[2] * g[0]) / det;
        a -= da;
        b -= db;
        if da.abs() < 1e-12 && db.abs() < 1e-12 {
            break;
        }
    }
    (a, b)
}

/// KKT complementarity violation of a fitted model on one training point:
/// returns how far y*f(x) strays from the side its alpha requires.
pub fn kkt_violation(y: f64, decision: f64, alpha: f64, c: f64) -> f64 {
    let margin = y * decision;
    if alpha <= 0.0 {
        (1.0 - margin).max(0.0)
    } else if alpha >= c {
        (margin - 1.0).max(0.0)
    } else {
        (margin - 1.0).abs()
    }
}
