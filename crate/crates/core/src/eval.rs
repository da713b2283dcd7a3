//! Patient-grouped stratified cross-validation, metric computation, leakage
//! auditing and report aggregation.
//!
//! Folds are planned at the patient level, so every row derived from a
//! patient (averaged or augmented) shares that patient's fold. All feature
//! stages and models are fitted on training patients only; test patients are
//! evaluated through their aggregated spectrum.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{build_training_matrix, test_time_aggregate, AugmentError};
use crate::config::{ModelChoice, RunConfig};
use crate::dataset::{FeatureIndex, FeatureMatrix, FeatureRow};
use crate::features::{FeatureError, FeaturePipeline};
use crate::ingest::Label;
use crate::models::{
    fit, oversample_minority, predict_proba, soft_vote, Classifier, ModelError, ModelKind,
};
use crate::preprocess::{CohortProcessing, DiscardEntry, ProcessedPatient};
use crate::util::{derive_seed, mean, std_pop, DenseMatrix};

const SEED_STREAM_FOLDS: u64 = 0x464f4c44; // "FOLD"
const SEED_STREAM_MODEL: u64 = 0x4d4f44; // "MOD"

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least {needed} patients for {folds}-fold cross-validation, have {have}")]
    TooFewPatients { needed: usize, folds: usize, have: usize },
    #[error("metric inputs are empty or misaligned")]
    BadMetricInput,
    #[error("fold {fold} leaks patients across train/test: {patients:?}")]
    Leakage { fold: usize, patients: Vec<String> },
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Patient-to-fold assignment, stratified by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub fold_count: usize,
    pub assignments: BTreeMap<String, usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn fold_of(&self, patient: &str) -> Option<usize> {
        self.assignments.get(patient).copied()
    }
}

/// Stratified patient partition: within each class, patients are shuffled
/// deterministically and dealt round-robin, so per-fold class counts differ
/// by at most one patient.
pub fn plan_folds(
    patients: &[(String, Label)],
    k: usize,
    seed: u64,
) -> Result<FoldPlan, EvalError> {
    if patients.len() < k || k == 0 {
        return Err(EvalError::TooFewPatients { needed: k.max(1), folds: k, have: patients.len() });
    }
    let mut ids: Vec<(String, Label)> = patients.to_vec();
    ids.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SEED_STREAM_FOLDS, 0));
    let mut assignments = BTreeMap::new();
    for class in [Label::Negative, Label::Positive] {
        let mut members: Vec<&str> =
            ids.iter().filter(|(_, l)| *l == class).map(|(id, _)| id.as_str()).collect();
        members.shuffle(&mut rng);
        for (i, id) in members.into_iter().enumerate() {
            assignments.insert(id.to_string(), i % k);
        }
    }
    Ok(FoldPlan { fold_count: k, assignments, seed })
}

/// Row indices of one fold's train/test split over a feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold: usize,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Expands a patient-level plan into row-level splits of a matrix.
pub fn fold_splits(plan: &FoldPlan, matrix: &FeatureMatrix) -> Vec<FoldSplit> {
    (0..plan.fold_count)
        .map(|fold| {
            let mut train_rows = Vec::new();
            let mut test_rows = Vec::new();
            for (r, row) in matrix.rows.iter().enumerate() {
                match plan.fold_of(&row.origin) {
                    Some(f) if f == fold => test_rows.push(r),
                    Some(_) => train_rows.push(r),
                    None => {}
                }
            }
            FoldSplit { fold, train_rows, test_rows }
        })
        .collect()
}

/// A patient whose rows straddle the train/test boundary of a fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageViolation {
    pub fold: usize,
    pub origin: String,
}

/// Checks that no origin patient appears on both sides of any fold.
/// Violations are data, not errors; a sound construction returns none.
pub fn leakage_audit(splits: &[FoldSplit], matrix: &FeatureMatrix) -> Vec<LeakageViolation> {
    let mut violations = Vec::new();
    for split in splits {
        let train: std::collections::BTreeSet<&str> =
            split.train_rows.iter().map(|&r| matrix.rows[r].origin.as_str()).collect();
        let mut seen = std::collections::BTreeSet::new();
        for &r in &split.test_rows {
            let origin = matrix.rows[r].origin.as_str();
            if train.contains(origin) && seen.insert(origin) {
                violations.push(LeakageViolation { fold: split.fold, origin: origin.to_string() });
            }
        }
    }
    violations
}

/// The six report metrics. A metric whose denominator is zero is reported as
/// 0 and listed in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub undefined: Vec<String>,
}

impl Metrics {
    pub fn values(&self) -> [f64; 6] {
        [
            self.balanced_accuracy,
            self.precision,
            self.recall,
            self.specificity,
            self.f1,
            self.roc_auc,
        ]
    }

    pub const NAMES: [&'static str; 6] =
        ["balanced_accuracy", "precision", "recall", "specificity", "f1", "roc_auc"];
}

/// Confusion-matrix metrics plus rank-based ROC-AUC (midranks for ties).
pub fn compute_metrics(
    truth: &[Label],
    predicted: &[Label],
    scores: &[f64],
) -> Result<Metrics, EvalError> {
    let n = truth.len();
    if n == 0 || predicted.len() != n || scores.len() != n {
        return Err(EvalError::BadMetricInput);
    }
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut tn = 0.0;
    let mut fn_ = 0.0;
    for (t, p) in truth.iter().zip(predicted) {
        match (t.is_positive(), p.is_positive()) {
            (true, true) => tp += 1.0,
            (false, true) => fp += 1.0,
            (false, false) => tn += 1.0,
            (true, false) => fn_ += 1.0,
        }
    }

    let mut undefined = Vec::new();
    let mut ratio = |name: &str, num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else {
            undefined.push(name.to_string());
            0.0
        }
    };
    let precision = ratio("precision", tp, tp + fp);
    let recall = ratio("recall", tp, tp + fn_);
    let specificity = ratio("specificity", tn, tn + fp);
    let f1 = ratio("f1", 2.0 * precision * recall, precision + recall);
    let balanced_accuracy = (recall + specificity) / 2.0;
    if undefined.iter().any(|u| u == "recall" || u == "specificity") {
        undefined.push("balanced_accuracy".to_string());
    }
    let roc_auc = match roc_auc_midrank(truth, scores) {
        Some(v) => v,
        None => {
            undefined.push("roc_auc".to_string());
            0.0
        }
    };

    Ok(Metrics { balanced_accuracy, precision, recall, specificity, f1, roc_auc, undefined })
}

/// ROC-AUC via the rank statistic; equivalent to trapezoidal integration over
/// all thresholds, with ties handled by midranks.
pub fn roc_auc_midrank(truth: &[Label], scores: &[f64]) -> Option<f64> {
    let n = truth.len();
    let pos = truth.iter().filter(|l| l.is_positive()).count();
    let neg = n - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            if truth[t].is_positive() {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let p = pos as f64;
    Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Per-model metrics for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub test_patients: usize,
    pub metrics: Vec<(String, Metrics)>,
    /// Row-level (pseudo-patient) diagnostics, when enabled.
    pub row_metrics: Option<Vec<(String, Metrics)>>,
}

/// Mean +/- standard deviation over folds, per model. Value order follows
/// [`Metrics::NAMES`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAggregate {
    pub model: String,
    pub mean: [f64; 6],
    pub std: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub seed: u64,
    pub retained_patients: usize,
    pub positives: usize,
    pub negatives: usize,
    pub training_rows: usize,
    pub discarded: Vec<DiscardEntry>,
    pub leakage_violations: Vec<LeakageViolation>,
    pub folds: Vec<FoldReport>,
    pub aggregate: Vec<ModelAggregate>,
}

impl EvaluationReport {
    pub fn aggregate_for(&self, model: &str) -> Option<&ModelAggregate> {
        self.aggregate.iter().find(|a| a.model == model)
    }

    /// Human-readable table with one row per model, mean +/- std per metric.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "seed {}  folds {}  range {}  mode {}  scaler {}  surf {}  pca {}  filter {}\n",
            self.seed,
            self.config.folds,
            self.config.scope.label(),
            self.config.mode.label(),
            self.config.features.scaler.label(),
            if self.config.features.surf { "on" } else { "off" },
            self.config.features.pca_components,
            if self.config.filter.filter_enabled { "on" } else { "off" },
        ));
        out.push_str(&format!(
            "patients {} ({} positive, {} negative)  training rows {}  discarded {}\n\n",
            self.retained_patients,
            self.positives,
            self.negatives,
            self.training_rows,
            self.discarded.len(),
        ));
        out.push_str(&format!(
            "{:<6} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13}\n",
            "Alg.", "Accuracy", "Precision", "Recall", "F1-Score", "Specificity", "ROC-AUC"
        ));
        for agg in &self.aggregate {
            let cell = |i: usize| format!("{:.2} ± {:.2}", agg.mean[i], agg.std[i]);
            out.push_str(&format!(
                "{:<6} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13}\n",
                agg.model,
                cell(0),
                cell(1),
                cell(2),
                cell(4),
                cell(3),
                cell(5),
            ));
        }
        out
    }
}

/// Runs the full grouped CV protocol over a preprocessed cohort.
pub fn cross_validate(
    processing: &CohortProcessing,
    config: &RunConfig,
) -> Result<EvaluationReport, EvalError> {
    let patients = &processing.patients;
    let labels: Vec<(String, Label)> =
        patients.iter().map(|p| (p.patient_id.clone(), p.label)).collect();
    let plan = plan_folds(&labels, config.folds, config.seed)?;

    let matrix = build_training_matrix(patients, config.scope, config.mode, config.augment_cap)?;
    let splits = fold_splits(&plan, &matrix);
    let leakage = leakage_audit(&splits, &matrix);
    if !leakage.is_empty() {
        return Err(EvalError::Leakage {
            fold: leakage[0].fold,
            patients: leakage.iter().map(|v| v.origin.clone()).collect(),
        });
    }

    // aggregated test vector per patient, computed once
    let mut aggregated: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for p in patients.iter() {
        aggregated.insert(p.patient_id.as_str(), test_time_aggregate(p, config.scope)?);
    }

    let kinds = config.required_kinds();
    let dense = matrix.to_dense();
    let mut folds = Vec::with_capacity(config.folds);

    for split in &splits {
        let fold_seed = derive_seed(config.seed, SEED_STREAM_MODEL, split.fold as u64);
        let report = evaluate_fold(
            processing,
            config,
            &matrix,
            &dense,
            split,
            &plan,
            &aggregated,
            &kinds,
            fold_seed,
        )?;
        folds.push(report);
    }

    // aggregate mean +/- std over folds, in the configured model order
    let mut aggregate = Vec::new();
    for choice in &config.models {
        let name = choice.display_name().to_string();
        let mut mean_v = [0.0; 6];
        let mut std_v = [0.0; 6];
        for i in 0..6 {
            let series: Vec<f64> = folds
                .iter()
                .filter_map(|f| f.metrics.iter().find(|(m, _)| *m == name))
                .map(|(_, metrics)| metrics.values()[i])
                .collect();
            mean_v[i] = mean(&series);
            std_v[i] = std_pop(&series);
        }
        aggregate.push(ModelAggregate { model: name, mean: mean_v, std: std_v });
    }

    let positives = patients.iter().filter(|p| p.label.is_positive()).count();
    Ok(EvaluationReport {
        config: config.clone(),
        seed: config.seed,
        retained_patients: patients.len(),
        positives,
        negatives: patients.len() - positives,
        training_rows: matrix.n_rows(),
        discarded: processing.discarded.clone(),
        leakage_violations: leakage,
        folds,
        aggregate,
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_fold(
    processing: &CohortProcessing,
    config: &RunConfig,
    matrix: &FeatureMatrix,
    dense: &DenseMatrix,
    split: &FoldSplit,
    plan: &FoldPlan,
    aggregated: &BTreeMap<&str, Vec<f64>>,
    kinds: &[ModelKind],
    fold_seed: u64,
) -> Result<FoldReport, EvalError> {
    // fit feature stages on training rows only
    let train_x = dense.select_rows(&split.train_rows);
    let train_labels: Vec<Label> =
        split.train_rows.iter().map(|&r| matrix.rows[r].label).collect();
    let (pipeline, transformed) = FeaturePipeline::fit(&train_x, &train_labels, &config.features)?;

    // oversample the minority class after the feature stages
    let train_matrix = FeatureMatrix {
        feature_index: FeatureIndex::Components(transformed.cols),
        rows: split
            .train_rows
            .iter()
            .enumerate()
            .map(|(k, &r)| FeatureRow {
                origin: matrix.rows[r].origin.clone(),
                label: matrix.rows[r].label,
                combo: matrix.rows[r].combo.clone(),
                values: transformed.row(k).to_vec(),
            })
            .collect(),
    };
    let train_matrix =
        if config.oversample { oversample_minority(&train_matrix)? } else { train_matrix };
    let fit_x = train_matrix.to_dense();
    let fit_labels = train_matrix.labels();

    let mut members: Vec<(ModelKind, Classifier)> = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        members.push((kind, fit(kind, &fit_x, &fit_labels, &config.hyper, fold_seed)?));
    }

    // per-patient test evaluation through the aggregated spectra
    let test_patients: Vec<&ProcessedPatient> = processing
        .patients
        .iter()
        .filter(|p| plan.fold_of(&p.patient_id) == Some(split.fold))
        .collect();
    let test_raw = DenseMatrix::from_rows(
        &test_patients
            .iter()
            .map(|p| aggregated[p.patient_id.as_str()].clone())
            .collect::<Vec<_>>(),
    );
    let test_x = pipeline.transform(&test_raw);
    let truth: Vec<Label> = test_patients.iter().map(|p| p.label).collect();

    let metrics = score_models(config, &members, &test_x, &truth)?;
    let row_metrics = if config.diagnostics {
        let rows_x = pipeline.transform(&dense.select_rows(&split.test_rows));
        let rows_truth: Vec<Label> =
            split.test_rows.iter().map(|&r| matrix.rows[r].label).collect();
        Some(score_models(config, &members, &rows_x, &rows_truth)?)
    } else {
        None
    };

    Ok(FoldReport { fold: split.fold, test_patients: test_patients.len(), metrics, row_metrics })
}

/// Scores every configured model (and the ensemble) on one test matrix.
fn score_models(
    config: &RunConfig,
    members: &[(ModelKind, Classifier)],
    test_x: &DenseMatrix,
    truth: &[Label],
) -> Result<Vec<(String, Metrics)>, EvalError> {
    let mut probs: BTreeMap<&'static str, Vec<[f64; 2]>> = BTreeMap::new();
    for (kind, model) in members {
        probs.insert(kind.display_name(), predict_proba(model, test_x)?);
    }

    let mut out = Vec::new();
    for choice in &config.models {
        let name = choice.display_name();
        let (scores, predicted): (Vec<f64>, Vec<Label>) = match choice {
            ModelChoice::Base(kind) => {
                let p = &probs[kind.display_name()];
                (
                    p.iter().map(|q| q[1]).collect(),
                    p.iter()
                        .map(|q| if q[1] > 0.5 { Label::Positive } else { Label::Negative })
                        .collect(),
                )
            }
            ModelChoice::Ensemble => {
                let member_probs: Vec<Vec<[f64; 2]>> =
                    members.iter().map(|(k, _)| probs[k.display_name()].clone()).collect();
                let voted = soft_vote(&member_probs).map_err(ModelError::from)?;
                (voted.iter().map(|(_, p)| p[1]).collect(), voted.iter().map(|(l, _)| *l).collect())
            }
        };
        out.push((name.to_string(), compute_metrics(truth, &predicted, &scores)?));
    }
    Ok(out)
}

/// A frozen end-to-end model: the feature pipeline and classifiers fitted on
/// a full cohort, reusable for prediction on new acquisitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub format_version: u32,
    pub config: RunConfig,
    pub pipeline: FeaturePipeline,
    pub members: Vec<(ModelKind, Classifier)>,
}

pub const MODEL_VERSION: u32 = 1;

/// Fits the feature stages and all required models on the whole cohort.
pub fn train_full(
    processing: &CohortProcessing,
    config: &RunConfig,
) -> Result<TrainedPipeline, EvalError> {
    let matrix = build_training_matrix(
        &processing.patients,
        config.scope,
        config.mode,
        config.augment_cap,
    )?;
    let dense = matrix.to_dense();
    let labels = matrix.labels();
    let (pipeline, transformed) = FeaturePipeline::fit(&dense, &labels, &config.features)?;
    let train_matrix = FeatureMatrix {
        feature_index: FeatureIndex::Components(transformed.cols),
        rows: matrix
            .rows
            .iter()
            .enumerate()
            .map(|(k, row)| FeatureRow {
                origin: row.origin.clone(),
                label: row.label,
                combo: row.combo.clone(),
                values: transformed.row(k).to_vec(),
            })
            .collect(),
    };
    let train_matrix =
        if config.oversample { oversample_minority(&train_matrix)? } else { train_matrix };
    let fit_x = train_matrix.to_dense();
    let fit_labels = train_matrix.labels();
    let seed = derive_seed(config.seed, SEED_STREAM_MODEL, u64::MAX);
    let members = config
        .required_kinds()
        .into_iter()
        .map(|kind| Ok((kind, fit(kind, &fit_x, &fit_labels, &config.hyper, seed)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(TrainedPipeline { format_version: MODEL_VERSION, config: config.clone(), pipeline, members })
}

/// Ensemble prediction for one aggregated patient vector.
pub fn predict_aggregated(
    trained: &TrainedPipeline,
    vector: &[f64],
) -> Result<(Label, f64), EvalError> {
    let x = trained.pipeline.transform(&DenseMatrix::from_rows(&[vector.to_vec()]));
    let member_probs: Vec<Vec<[f64; 2]>> = trained
        .members
        .iter()
        .map(|(_, m)| predict_proba(m, &x))
        .collect::<Result<_, _>>()?;
    let voted = soft_vote(&member_probs).map_err(ModelError::from)?;
    Ok((voted[0].0, voted[0].1[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_folds_exact_divisibility() {
        let patients: Vec<(String, Label)> = (0..20)
            .map(|i| (format!("P{i:02}"), if i < 10 { Label::Positive } else { Label::Negative }))
            .collect();
        let plan = plan_folds(&patients, 10, 1).unwrap();
        for fold in 0..10 {
            let members: Vec<&String> = patients
                .iter()
                .map(|(id, _)| id)
                .filter(|id| plan.fold_of(id) == Some(fold))
                .collect();
            assert_eq!(members.len(), 2);
            let pos = members
                .iter()
                .filter(|id| patients.iter().any(|(p, l)| &p == *id && l.is_positive()))
                .count();
            assert_eq!(pos, 1, "fold {fold}");
        }
    }

    #[test]
    fn paper_scale_stratification() {
        let patients: Vec<(String, Label)> = (0..302)
            .map(|i| (format!("P{i:03}"), if i < 91 { Label::Positive } else { Label::Negative }))
            .collect();
        let plan = plan_folds(&patients, 10, 3).unwrap();
        for fold in 0..10 {
            let pos = patients
                .iter()
                .filter(|(id, l)| l.is_positive() && plan.fold_of(id) == Some(fold))
                .count();
            assert!(pos == 9 || pos == 10, "fold {fold} has {pos} positives");
        }
    }

    #[test]
    fn plan_is_deterministic_and_errors_when_too_small() {
        let patients: Vec<(String, Label)> = (0..12)
            .map(|i| (format!("P{i}"), if i % 3 == 0 { Label::Positive } else { Label::Negative }))
            .collect();
        assert_eq!(plan_folds(&patients, 5, 9).unwrap(), plan_folds(&patients, 5, 9).unwrap());
        assert_ne!(
            plan_folds(&patients, 5, 9).unwrap().assignments,
            plan_folds(&patients, 5, 10).unwrap().assignments
        );
        assert!(matches!(plan_folds(&patients, 13, 0), Err(EvalError::TooFewPatients { .. })));
    }

    #[test]
    fn confusion_matrix_example() {
        // TP=3, FP=1, FN=1, TN=5
        let truth = [
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Negative,
        ];
        let predicted = [
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Negative,
        ];
        let scores: Vec<f64> =
            predicted.iter().map(|p| if p.is_positive() { 0.9 } else { 0.1 }).collect();
        let m = compute_metrics(&truth, &predicted, &scores).unwrap();
        assert!((m.precision - 0.75).abs() < 1e-12);
        assert!((m.recall - 0.75).abs() < 1e-12);
        assert!((m.specificity - 5.0 / 6.0).abs() < 1e-12);
        assert!((m.balanced_accuracy - (0.75 + 5.0 / 6.0) / 2.0).abs() < 1e-12);
        assert!((m.f1 - 0.75).abs() < 1e-12);
        assert!(m.undefined.is_empty());
    }

    #[test]
    fn perfect_prediction_scores_one_everywhere() {
        let truth = [Label::Positive, Label::Negative, Label::Positive, Label::Negative];
        let scores = [0.9, 0.1, 0.8, 0.2];
        let m = compute_metrics(&truth, &truth, &scores).unwrap();
        for v in m.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_scores_give_half_auc() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let truth: Vec<Label> = (0..500)
            .map(|_| if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative })
            .collect();
        let scores: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..1.0)).collect();
        let auc = roc_auc_midrank(&truth, &scores).unwrap();
        assert!((auc - 0.5).abs() < 0.07, "auc {auc}");
    }

    #[test]
    fn auc_matches_pairwise_oracle_with_ties() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let truth: Vec<Label> = (0..200)
            .map(|_| if rng.gen_bool(0.4) { Label::Positive } else { Label::Negative })
            .collect();
        // coarse scores force plenty of ties
        let scores: Vec<f64> = (0..200).map(|_| (rng.gen_range(0..10) as f64) / 10.0).collect();
        let auc = roc_auc_midrank(&truth, &scores).unwrap();
        // brute-force Mann-Whitney over all (positive, negative) pairs
        let mut wins = 0.0;
        let mut total = 0.0;
        for i in 0..truth.len() {
            for j in 0..truth.len() {
                if truth[i].is_positive() && !truth[j].is_positive() {
                    total += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        assert!((auc - wins / total).abs() < 1e-9);
    }

    #[test]
    fn undefined_metrics_flagged_not_crashed() {
        let truth = [Label::Negative, Label::Negative];
        let predicted = [Label::Negative, Label::Negative];
        let m = compute_metrics(&truth, &predicted, &[0.1, 0.2]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert!(m.undefined.iter().any(|u| u == "precision"));
        assert!(m.undefined.iter().any(|u| u == "recall"));
        assert!(m.undefined.iter().any(|u| u == "roc_auc"));
        assert!(m.undefined.iter().any(|u| u == "balanced_accuracy"));
    }

    fn toy_matrix(patients: usize, rows_per_patient: usize) -> FeatureMatrix {
        let rows = (0..patients)
            .flat_map(|p| {
                (0..rows_per_patient).map(move |r| FeatureRow {
                    origin: format!("P{p:03}"),
                    label: if p % 2 == 0 { Label::Positive } else { Label::Negative },
                    combo: Some(format!("{r}")),
                    values: vec![p as f64, r as f64],
                })
            })
            .collect();
        FeatureMatrix { feature_index: FeatureIndex::Components(2), rows }
    }

    #[test]
    fn audit_clean_and_corrupted_plans() {
        let matrix = toy_matrix(30, 4);
        let patients: Vec<(String, Label)> = (0..30)
            .map(|p| (format!("P{p:03}"), if p % 2 == 0 { Label::Positive } else { Label::Negative }))
            .collect();
        let plan = plan_folds(&patients, 5, 0).unwrap();
        let mut splits = fold_splits(&plan, &matrix);
        assert!(leakage_audit(&splits, &matrix).is_empty());

        // corrupt: move one pseudo-patient row of a train patient into test
        let victim = splits[0].train_rows[0];
        splits[0].test_rows.push(victim);
        let violations = leakage_audit(&splits, &matrix);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].fold, 0);
        assert_eq!(violations[0].origin, matrix.rows[victim].origin);
    }

    #[test]
    fn grouping_no_patient_straddles_folds() {
        let matrix = toy_matrix(25, 3);
        let patients: Vec<(String, Label)> = (0..25)
            .map(|p| (format!("P{p:03}"), if p % 2 == 0 { Label::Positive } else { Label::Negative }))
            .collect();
        let plan = plan_folds(&patients, 5, 4).unwrap();
        let splits = fold_splits(&plan, &matrix);
        for split in &splits {
            let train: std::collections::BTreeSet<&str> =
                split.train_rows.iter().map(|&r| matrix.rows[r].origin.as_str()).collect();
            let test: std::collections::BTreeSet<&str> =
                split.test_rows.iter().map(|&r| matrix.rows[r].origin.as_str()).collect();
            assert!(train.is_disjoint(&test));
        }
        // all rows of each patient share the fold
        for (id, fold) in &plan.assignments {
            for (r, row) in matrix.rows.iter().enumerate() {
                if &row.origin == id {
                    assert!(splits[*fold].test_rows.contains(&r));
                }
            }
        }
    }

    #[test]
    fn aggregation_arithmetic() {
        let series = [0.8, 0.6];
        assert!((mean(&series) - 0.7).abs() < 1e-12);
        assert!((std_pop(&series) - 0.1).abs() < 1e-12);
    }
}
