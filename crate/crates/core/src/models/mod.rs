//! The five base classifiers, minority-class oversampling, and the
//! soft-voting ensemble.
//!
//! A fitted [`Classifier`] is immutable; `predict_proba` always returns
//! per-row `(p_neg, p_pos)` pairs that sum to one.

pub mod boost;
pub mod ensemble;
pub mod knn;
pub mod logistic;
pub mod svm;
pub mod tree;

mod forest;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::FeatureMatrix;
use crate::ingest::Label;
use crate::util::DenseMatrix;

pub use boost::{BoostModel, BoostParams};
pub use ensemble::{soft_vote, EnsembleSpec, VoteError};
pub use forest::{ForestModel, ForestParams};
pub use knn::KnnModel;
pub use logistic::LogisticModel;
pub use svm::{SvmModel, SvmParams};

/// The classifier families of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Knn,
    LogisticRegression,
    RandomForest,
    GradientBoosting,
    SvmRbf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        Self::Knn,
        Self::RandomForest,
        Self::LogisticRegression,
        Self::GradientBoosting,
        Self::SvmRbf,
    ];

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "knn" => Some(Self::Knn),
            "lr" | "logistic" => Some(Self::LogisticRegression),
            "rf" | "forest" => Some(Self::RandomForest),
            "gb" | "xgb" | "boost" => Some(Self::GradientBoosting),
            "svm" | "svc" => Some(Self::SvmRbf),
            _ => None,
        }
    }

    /// Short table name, matching the usual report layout.
    pub fn display_name(self) -> &'static str {
        match self {
            Self::Knn => "KNN",
            Self::RandomForest => "RF",
            Self::LogisticRegression => "LR",
            Self::GradientBoosting => "xGB",
            Self::SvmRbf => "SVC",
        }
    }
}

/// Hyperparameters for every model family. The values here are fixed,
/// documented defaults; all are overridable through the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub knn_k: usize,
    pub rf_trees: usize,
    pub rf_max_depth: usize,
    pub rf_min_leaf: usize,
    pub gb_rounds: usize,
    pub gb_depth: usize,
    pub gb_shrinkage: f64,
    pub gb_lambda: f64,
    pub svm_c: f64,
    pub svm_gamma: Option<f64>,
    pub svm_tol: f64,
    /// SMO training-set ceiling; larger training folds are stratified-
    /// subsampled for the SVM only.
    pub svm_max_train: usize,
    pub lr_l2: f64,
    pub lr_tol: f64,
    pub lr_max_iter: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            knn_k: 5,
            rf_trees: 100,
            rf_max_depth: 16,
            rf_min_leaf: 1,
            gb_rounds: 100,
            gb_depth: 3,
            gb_shrinkage: 0.1,
            gb_lambda: 1.0,
            svm_c: 1.0,
            svm_gamma: None,
            svm_tol: 1e-3,
            svm_max_train: 4000,
            lr_l2: 1e-3,
            lr_tol: 1e-6,
            lr_max_iter: 200,
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("prediction rows have width {found}, model was fitted on {expected}")]
    WidthMismatch { found: usize, expected: usize },
    #[error("no training rows")]
    EmptyTrain,
    #[error(transparent)]
    Vote(#[from] VoteError),
}

/// A fitted classifier of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    Knn(KnnModel),
    Logistic(LogisticModel),
    Forest(ForestModel),
    Boost(BoostModel),
    Svm(SvmModel),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Knn(_) => ModelKind::Knn,
            Self::Logistic(_) => ModelKind::LogisticRegression,
            Self::Forest(_) => ModelKind::RandomForest,
            Self::Boost(_) => ModelKind::GradientBoosting,
            Self::Svm(_) => ModelKind::SvmRbf,
        }
    }

    pub fn train_width(&self) -> usize {
        match self {
            Self::Knn(m) => m.x.cols,
            Self::Logistic(m) => m.weights.len(),
            Self::Forest(_) | Self::Boost(_) => usize::MAX, // trees carry no fixed width
            Self::Svm(m) => m.support.cols,
        }
    }
}

/// Fits one classifier. `seed` drives the stochastic families (RF bootstrap
/// and feature subsampling, SVM subsampling); everything else is
/// deterministic by construction.
pub fn fit(
    kind: ModelKind,
    x: &DenseMatrix,
    labels: &[Label],
    hp: &Hyperparams,
    seed: u64,
) -> Result<Classifier, ModelError> {
    if x.rows == 0 {
        return Err(ModelError::EmptyTrain);
    }
    for r in 0..x.rows {
        if let Some(col) = x.row(r).iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteFeature { row: r, col });
        }
    }
    let positive: Vec<bool> = labels.iter().map(|l| l.is_positive()).collect();
    let pos = positive.iter().filter(|&&p| p).count();
    if pos == 0 || pos == x.rows {
        return Err(ModelError::SingleClass);
    }

    Ok(match kind {
        ModelKind::Knn => Classifier::Knn(knn::fit_knn(x, &positive, hp.knn_k)),
        ModelKind::LogisticRegression => Classifier::Logistic(logistic::fit_logistic(
            x,
            &positive,
            hp.lr_l2,
            hp.lr_tol,
            hp.lr_max_iter,
        )),
        ModelKind::RandomForest => Classifier::Forest(forest::fit_forest(
            x,
            &positive,
            &ForestParams {
                trees: hp.rf_trees,
                max_depth: hp.rf_max_depth,
                min_leaf: hp.rf_min_leaf,
            },
            seed,
        )),
        ModelKind::GradientBoosting => Classifier::Boost(boost::fit_boost(
            x,
            &positive,
            &BoostParams {
                rounds: hp.gb_rounds,
                depth: hp.gb_depth,
                shrinkage: hp.gb_shrinkage,
                lambda: hp.gb_lambda,
            },
        )),
        ModelKind::SvmRbf => Classifier::Svm(svm::fit_svm(
            x,
            &positive,
            &SvmParams {
                c: hp.svm_c,
                gamma: hp.svm_gamma,
                tol: hp.svm_tol,
                max_train: hp.svm_max_train,
            },
            seed,
        )),
    })
}

/// Per-row class probabilities `(p_neg, p_pos)`; each pair sums to one and
/// both entries lie in [0, 1].
pub fn predict_proba(c: &Classifier, rows: &DenseMatrix) -> Result<Vec<[f64; 2]>, ModelError> {
    let width = c.train_width();
    if width != usize::MAX && rows.cols != width {
        return Err(ModelError::WidthMismatch { found: rows.cols, expected: width });
    }
    let mut out = Vec::with_capacity(rows.rows);
    for r in 0..rows.rows {
        let row = rows.row(r);
        let p_pos = match c {
            Classifier::Knn(m) => m.predict_one(row),
            Classifier::Logistic(m) => m.predict_one(row),
            Classifier::Forest(m) => m.predict_one(row),
            Classifier::Boost(m) => m.predict_one(row),
            Classifier::Svm(m) => m.predict_one(row),
        }
        .clamp(0.0, 1.0);
        out.push([1.0 - p_pos, p_pos]);
    }
    Ok(out)
}

/// Duplicates minority rows cyclically until the class counts are equal.
/// Deterministic; the set of distinct minority rows is unchanged.
pub fn oversample_minority(matrix: &FeatureMatrix) -> Result<FeatureMatrix, ModelError> {
    let pos: Vec<usize> =
        (0..matrix.rows.len()).filter(|&r| matrix.rows[r].label.is_positive()).collect();
    let neg: Vec<usize> =
        (0..matrix.rows.len()).filter(|&r| !matrix.rows[r].label.is_positive()).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(ModelError::SingleClass);
    }
    let mut out = matrix.clone();
    let (minority, deficit) = if pos.len() < neg.len() {
        (&pos, neg.len() - pos.len())
    } else {
        (&neg, pos.len() - neg.len())
    };
    for k in 0..deficit {
        out.rows.push(matrix.rows[minority[k % minority.len()]].clone());
    }
    Ok(out)
}
