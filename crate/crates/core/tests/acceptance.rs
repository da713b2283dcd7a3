//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test -p breathms-core --test acceptance`
//! (add `-- --nocapture` to see the lines for passing criteria).

use std::sync::OnceLock;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use breathms_core::augment::{augment_patient, AcquisitionMode};
use breathms_core::config::{ModelChoice, RunConfig};
use breathms_core::dataset::{FeatureIndex, FeatureMatrix, FeatureRow};
use breathms_core::eval::{
    compute_metrics, cross_validate, fold_splits, leakage_audit, plan_folds, roc_auc_midrank,
    EvaluationReport,
};
use breathms_core::features::{fit_pca, project};
use breathms_core::ingest::{Label, MassRangeId};
use breathms_core::models::ModelKind;
use breathms_core::preprocess::{
    process_cohort, savgol_filter, savgol_kernel, AlignedSpectrum, PlateauSelection,
    ProcessedPatient, ProcessedRange, Scope, SpectrumRange, TicCurve,
};
use breathms_core::synth::{check_aligned_peaks, generate_cohort, render_discrepancies, SynthSpec};
use breathms_core::util::DenseMatrix;

fn pass(criterion: u32, name: &str) {
    println!("criterion {criterion} ({name}): PASS");
}

// ---------------------------------------------------------------------------
// criterion 1: Savitzky-Golay exactness
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_savitzky_golay_exactness() {
    let t0 = Instant::now();

    // window-5/polyorder-2 kernel equals the classical coefficients to 1e-12
    let kernel = savgol_kernel(5, 2, 0).unwrap();
    let expected = [-3.0, 12.0, 17.0, 12.0, -3.0].map(|v| v / 35.0);
    for (a, b) in kernel.iter().zip(expected.iter()) {
        assert!((a - b).abs() < 1e-12, "kernel {kernel:?}");
    }

    // polynomials of degree <= polyorder on >= 50 points reproduce exactly
    // at interior positions
    for (window, polyorder) in [(5usize, 2usize), (7, 3), (9, 4), (11, 3)] {
        for degree in 0..=polyorder {
            let signal: Vec<f64> = (0..60)
                .map(|i| {
                    let x = i as f64 * 0.17 - 5.0;
                    (0..=degree).map(|k| (k as f64 + 0.5) * x.powi(k as i32)).sum()
                })
                .collect();
            let out = savgol_filter(&signal, window, polyorder, 0).unwrap();
            let half = window / 2;
            for i in half..signal.len() - half {
                assert!(
                    (out[i] - signal[i]).abs() < 1e-9,
                    "window {window} poly {polyorder} degree {degree} at {i}: {} vs {}",
                    out[i],
                    signal[i]
                );
            }
        }
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    pass(1, "Savitzky-Golay exactness");
}

// ---------------------------------------------------------------------------
// criterion 2: plateau oracle
// ---------------------------------------------------------------------------

/// Exactness regime: fixed acquisition count and ramp so the quantile
/// tolerance separates the gradient clusters, no baseline and no m/z jitter
/// so alignment is the identity on the sampled integer positions.
fn plateau_spec(n: usize, seed: u64, noise: f64) -> SynthSpec {
    SynthSpec {
        seed,
        n_patients: n,
        positive_fraction: 0.3,
        acq_min: 12,
        acq_max: 12,
        ramp_min: 2,
        ramp_max: 2,
        noise,
        baseline_amp: 0.0,
        mz_jitter: 0.0,
        sample_step: 0.25,
        peak_variation: 0.2,
        spike_rate: 0.0,
        rare_peak_rate: 0.0,
        outlier_rate: 0.0,
        no_plateau_rate: 0.0,
    }
}

fn plateau_recovery_rate(noise: f64, seed: u64) -> f64 {
    let synth = generate_cohort(&plateau_spec(100, seed, noise)).unwrap();
    let mut params = breathms_core::preprocess::FilterParams::default();
    params.plateau_q = 0.75;
    let processing = process_cohort(&synth.cohort, &params, Scope::Whole).unwrap();
    let discrepancies = breathms_core::synth::ground_truth_check(&processing, &synth.truth);
    let mut failed: std::collections::BTreeSet<String> = Default::default();
    for d in &discrepancies {
        let text = format!("{d}");
        failed.insert(text.split(' ').next().unwrap_or("").trim_end_matches(':').to_string());
    }
    if !discrepancies.is_empty() {
        eprintln!("plateau discrepancies at noise {noise}:\n{}", render_discrepancies(&discrepancies));
    }
    (100 - failed.len()) as f64 / 100.0
}

#[test]
fn criterion_02_plateau_oracle() {
    let t0 = Instant::now();
    let noiseless = plateau_recovery_rate(0.0, 42);
    assert_eq!(noiseless, 1.0, "noiseless recovery must be exact");
    let noisy = plateau_recovery_rate(0.05, 43);
    assert!(noisy >= 0.95, "noisy recovery {noisy} < 0.95");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    pass(2, "plateau oracle");
}

// ---------------------------------------------------------------------------
// criterion 3: peak alignment
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_peak_alignment() {
    let t0 = Instant::now();

    // jitter up to +/- 0.4: every true peak lands on its true integer bin
    let spec = SynthSpec {
        mz_jitter: 0.4,
        sample_step: 0.125,
        n_patients: 40,
        seed: 97,
        ..plateau_spec(40, 97, 0.0)
    };
    let synth = generate_cohort(&spec).unwrap();
    let bad = check_aligned_peaks(&synth.cohort, &synth.truth);
    assert!(bad.is_empty(), "{}", render_discrepancies(&bad));

    // integer-gridded input: alignment is the identity
    let spec = SynthSpec { sample_step: 1.0, n_patients: 10, seed: 98, ..plateau_spec(10, 98, 0.0) };
    let synth = generate_cohort(&spec).unwrap();
    for record in &synth.cohort.patients {
        for acqs in &record.acquisitions {
            for acq in acqs {
                let aligned = breathms_core::preprocess::align_peaks(acq).unwrap();
                for (k, sample) in acq.samples.iter().enumerate() {
                    assert_eq!(
                        aligned.values[k], sample.intensity,
                        "identity violated at {}", sample.mz
                    );
                }
            }
        }
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    pass(3, "peak alignment");
}

// ---------------------------------------------------------------------------
// criterion 4: augmentation counting
// ---------------------------------------------------------------------------

/// Constructs a processed patient with the given per-range retained counts.
fn synthetic_processed(id: &str, label: Label, counts: [usize; 4]) -> ProcessedPatient {
    let mut ranges: [Option<ProcessedRange>; 4] = Default::default();
    for r in MassRangeId::ALL {
        let k = r.index();
        let range = SpectrumRange::Single(r);
        let mk = |seed: usize| {
            let mut s = AlignedSpectrum::zeros(range);
            let i = (seed * 11 + k * 3) % s.values.len();
            s.values[i] = 1.0;
            s
        };
        ranges[k] = Some(ProcessedRange {
            selection: PlateauSelection { plateau: (0, 3), chosen: [0, 1, 2, 3], epsilon: 0.0 },
            tic: TicCurve { values: vec![1.0; 4] },
            averaged: mk(0),
            acquisitions: (0..counts[k]).map(mk).collect(),
        });
    }
    ProcessedPatient { patient_id: id.into(), label, ranges }
}

#[test]
fn criterion_04_augmentation_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in 0..50 {
        let counts: [usize; 4] = std::array::from_fn(|_| rng.gen_range(1..=5));
        let patient = synthetic_processed(&format!("A{p:02}"), Label::Positive, counts);
        let pseudos = augment_patient(&patient, usize::MAX).unwrap();
        let expected: usize = counts.iter().product();
        assert_eq!(pseudos.len(), expected, "counts {counts:?}");
        // ids are unique and follow the letter scheme
        let ids: std::collections::BTreeSet<String> = pseudos.iter().map(|q| q.id()).collect();
        assert_eq!(ids.len(), expected);
        assert_eq!(pseudos[0].id(), format!("A{p:02}-AAAA"));
        let last = pseudos.last().unwrap();
        let expected_last: String = counts
            .iter()
            .map(|&c| (b'A' + (c - 1) as u8) as char)
            .collect();
        assert_eq!(last.id(), format!("A{p:02}-{expected_last}"));
    }
    pass(4, "augmentation counting");
}

// ---------------------------------------------------------------------------
// criterion 5: leakage audit
// ---------------------------------------------------------------------------

fn augmented_matrix(patients: usize, rows_per_patient: usize) -> FeatureMatrix {
    let rows = (0..patients)
        .flat_map(|p| {
            (0..rows_per_patient).map(move |r| FeatureRow {
                origin: format!("L{p:03}"),
                label: if p % 3 == 0 { Label::Positive } else { Label::Negative },
                combo: Some(format!("{r}")),
                values: vec![p as f64, r as f64],
            })
        })
        .collect();
    FeatureMatrix { feature_index: FeatureIndex::Components(2), rows }
}

#[test]
fn criterion_05_leakage_audit() {
    let matrix = augmented_matrix(60, 16);
    let patients: Vec<(String, Label)> = (0..60)
        .map(|p| (format!("L{p:03}"), if p % 3 == 0 { Label::Positive } else { Label::Negative }))
        .collect();

    // 100 random fold plans: zero violations
    for seed in 0..100 {
        let plan = plan_folds(&patients, 10, seed).unwrap();
        let splits = fold_splits(&plan, &matrix);
        let violations = leakage_audit(&splits, &matrix);
        assert!(violations.is_empty(), "seed {seed}: {violations:?}");
    }

    // deliberate corruption yields exactly the injected violation count
    let plan = plan_folds(&patients, 10, 7).unwrap();
    let mut splits = fold_splits(&plan, &matrix);
    let injected = 3;
    for k in 0..injected {
        let victim = splits[k].train_rows[k];
        splits[k].test_rows.push(victim);
    }
    let violations = leakage_audit(&splits, &matrix);
    assert_eq!(violations.len(), injected);

    // a 47k-row augmented matrix audits in < 1 s: the engineered retention
    // mix reproduces the full-cohort scale (183 patients at 4x4x4x4 plus 19
    // at 12 plus 1 at 8 over 203 patients = 47,084 rows)
    let mut rows = Vec::with_capacity(47_084);
    let mut push_patient = |p: usize, combos: usize| {
        for c in 0..combos {
            rows.push(FeatureRow {
                origin: format!("W{p:03}"),
                label: if p % 3 == 0 { Label::Positive } else { Label::Negative },
                combo: Some(format!("{c}")),
                values: vec![p as f64],
            });
        }
    };
    for p in 0..183 {
        push_patient(p, 256);
    }
    for p in 183..202 {
        push_patient(p, 12);
    }
    push_patient(202, 8);
    let big = FeatureMatrix { feature_index: FeatureIndex::Components(1), rows };
    assert_eq!(big.n_rows(), 47_084);
    let big_patients: Vec<(String, Label)> = (0..203)
        .map(|p| (format!("W{p:03}"), if p % 3 == 0 { Label::Positive } else { Label::Negative }))
        .collect();
    let plan = plan_folds(&big_patients, 10, 1).unwrap();
    let splits = fold_splits(&plan, &big);
    let t0 = Instant::now();
    let violations = leakage_audit(&splits, &big);
    let elapsed = t0.elapsed();
    assert!(violations.is_empty());
    assert!(elapsed.as_secs_f64() < 1.0, "audit took {elapsed:?}, budget 1 s");

    pass(5, "leakage audit");
}

// ---------------------------------------------------------------------------
// criterion 6: metric oracles
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_metric_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for set in 0..1000 {
        let n = rng.gen_range(4..120);
        let truth: Vec<Label> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative })
            .collect();
        let predicted: Vec<Label> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative })
            .collect();
        let scores: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..50) as f64) / 50.0).collect();
        let m = compute_metrics(&truth, &predicted, &scores).unwrap();

        // independent brute-force confusion-matrix arithmetic
        let tp = truth
            .iter()
            .zip(&predicted)
            .filter(|(t, p)| t.is_positive() && p.is_positive())
            .count() as f64;
        let fp = truth
            .iter()
            .zip(&predicted)
            .filter(|(t, p)| !t.is_positive() && p.is_positive())
            .count() as f64;
        let tn = truth
            .iter()
            .zip(&predicted)
            .filter(|(t, p)| !t.is_positive() && !p.is_positive())
            .count() as f64;
        let fng = truth.len() as f64 - tp - fp - tn;
        let div = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        let precision = div(tp, tp + fp);
        let recall = div(tp, tp + fng);
        let specificity = div(tn, tn + fp);
        let f1 = div(2.0 * precision * recall, precision + recall);
        let balanced = (recall + specificity) / 2.0;
        assert!((m.precision - precision).abs() < 1e-12, "set {set}");
        assert!((m.recall - recall).abs() < 1e-12);
        assert!((m.specificity - specificity).abs() < 1e-12);
        assert!((m.f1 - f1).abs() < 1e-12);
        assert!((m.balanced_accuracy - balanced).abs() < 1e-12);

        // pairwise Mann-Whitney oracle on the same set
        let pos = truth.iter().filter(|l| l.is_positive()).count();
        if pos > 0 && pos < n {
            let mut wins = 0.0;
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
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
            assert!((m.roc_auc - wins / total).abs() < 1e-9, "set {set}");
        }
    }

    // one large set near the 1,000-point bound
    let n = 1000;
    let truth: Vec<Label> = (0..n)
        .map(|_| if rng.gen_bool(0.4) { Label::Positive } else { Label::Negative })
        .collect();
    let scores: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..200) as f64) / 200.0).collect();
    let auc = roc_auc_midrank(&truth, &scores).unwrap();
    let mut wins = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
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

    pass(6, "metric oracles");
}

// ---------------------------------------------------------------------------
// criterion 7: PCA correctness
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_pca_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows = 100;
    let cols = 50;
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = DenseMatrix { rows, cols, data };
    let k = 12;
    let model = fit_pca(&x, k).unwrap();

    // basis orthonormal to 1e-8
    for i in 0..k {
        for j in 0..k {
            let dot: f64 =
                model.components[i].iter().zip(&model.components[j]).map(|(a, b)| a * b).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((dot - expected).abs() < 1e-8, "orthonormality at ({i},{j})");
        }
    }

    // independent dense eigensolver oracle on the same sample covariance
    let mut mean = vec![0.0; cols];
    for r in 0..rows {
        for (m, v) in mean.iter_mut().zip(x.row(r)) {
            *m += v / rows as f64;
        }
    }
    let mut cov = nalgebra::DMatrix::<f64>::zeros(cols, cols);
    for r in 0..rows {
        for i in 0..cols {
            for j in 0..cols {
                cov[(i, j)] += (x.row(r)[i] - mean[i]) * (x.row(r)[j] - mean[j])
                    / (rows as f64 - 1.0);
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..cols)
        .map(|c| (eig.eigenvalues[c], eig.eigenvectors.column(c).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let projected = project(&model, &x);
    for c in 0..k {
        assert!(
            (model.explained_variance[c] - pairs[c].0).abs() < 1e-6,
            "eigenvalue {c}: {} vs {}",
            model.explained_variance[c],
            pairs[c].0
        );
        // align signs through the dot product, then compare projections
        let dot: f64 = model.components[c].iter().zip(&pairs[c].1).map(|(a, b)| a * b).sum();
        let sign = if dot >= 0.0 { 1.0 } else { -1.0 };
        for r in 0..rows {
            let oracle: f64 = (0..cols)
                .map(|i| (x.row(r)[i] - mean[i]) * pairs[c].1[i] * sign)
                .sum();
            assert!(
                (projected.row(r)[c] - oracle).abs() < 1e-6,
                "projection ({r},{c}): {} vs {oracle}",
                projected.row(r)[c]
            );
        }
    }

    pass(7, "PCA correctness");
}

// ---------------------------------------------------------------------------
// criteria 8 and 10: end-to-end synthetic protocol and its determinism
// ---------------------------------------------------------------------------

/// The full-protocol cohort: moderate noise, patient-level biological
/// variation, heavy-tailed peak abundances, class signal confined to range 2.
fn protocol_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        seed,
        n_patients: 300,
        positive_fraction: 0.3,
        acq_min: 12,
        acq_max: 12,
        ramp_min: 2,
        ramp_max: 2,
        noise: 0.12,
        baseline_amp: 0.15,
        mz_jitter: 0.3,
        sample_step: 0.25,
        peak_variation: 0.3,
        spike_rate: 0.06,
        rare_peak_rate: 0.15,
        outlier_rate: 0.0,
        no_plateau_rate: 0.0,
    }
}

const PROTOCOL_SEED: u64 = 8;

fn protocol_config(seed: u64) -> RunConfig {
    let mut config = RunConfig {
        seed,
        scope: Scope::Whole,
        mode: AcquisitionMode::MultipleAugmented,
        ..RunConfig::default()
    };
    config.filter.plateau_q = 0.75;
    config
}

struct ProtocolRun {
    report_json: String,
    report_txt: String,
    report: EvaluationReport,
    svc_multiple_ss: EvaluationReport,
    svc_single_ss: EvaluationReport,
    svc_multiple_rs: EvaluationReport,
    wall: std::time::Duration,
}

fn run_protocol(seed: u64) -> ProtocolRun {
    use breathms_core::features::ScalerKind;
    let t0 = Instant::now();
    let synth = generate_cohort(&protocol_spec(seed)).unwrap();

    // headline whole-spectrum run: filtering, robust scaler, PCA-20,
    // multiple-acquisition training, patient-averaged testing, oversampling,
    // 10-fold grouped CV
    let config = protocol_config(seed);
    let processing = process_cohort(&synth.cohort, &config.filter, config.scope).unwrap();
    let report = cross_validate(&processing, &config).unwrap();
    let report_json = serde_json::to_string_pretty(&report).unwrap();
    let report_txt = report.render_table();

    // range-2 comparison arms (the qualitative orderings)
    let r2 = Scope::Single(MassRangeId::R2);
    let processing_r2 = process_cohort(&synth.cohort, &config.filter, r2).unwrap();
    let mut svc = protocol_config(seed);
    svc.scope = r2;
    svc.models = vec![ModelChoice::Base(ModelKind::SvmRbf)];
    svc.features.scaler = ScalerKind::Standard;
    let svc_multiple_ss = cross_validate(&processing_r2, &svc).unwrap();
    let svc_single_ss = {
        let mut c = svc.clone();
        c.mode = AcquisitionMode::SingleAveraged;
        cross_validate(&processing_r2, &c).unwrap()
    };
    let svc_multiple_rs = {
        let mut c = svc.clone();
        c.features.scaler = ScalerKind::Robust;
        cross_validate(&processing_r2, &c).unwrap()
    };

    ProtocolRun {
        report_json,
        report_txt,
        report,
        svc_multiple_ss,
        svc_single_ss,
        svc_multiple_rs,
        wall: t0.elapsed(),
    }
}

fn protocol_run_cached() -> &'static ProtocolRun {
    static RUN: OnceLock<ProtocolRun> = OnceLock::new();
    RUN.get_or_init(|| run_protocol(PROTOCOL_SEED))
}

#[test]
fn criterion_08_end_to_end_protocol() {
    let run = protocol_run_cached();
    println!("{}", run.report_txt);

    let ens = run.report.aggregate_for("Ens.").unwrap();
    assert!(ens.mean[0] >= 0.90, "ensemble balanced accuracy {} < 0.90", ens.mean[0]);
    assert!(ens.mean[5] >= 0.95, "ensemble ROC-AUC {} < 0.95", ens.mean[5]);
    assert!(run.report.leakage_violations.is_empty());

    // multiple-acquisition training >= single-acquisition (SVC, range 2)
    let multiple = run.svc_multiple_ss.aggregate_for("SVC").unwrap().mean[0];
    let single = run.svc_single_ss.aggregate_for("SVC").unwrap().mean[0];
    assert!(
        multiple >= single,
        "multiple-acquisition SVC ({multiple:.3}) must not trail single ({single:.3})"
    );

    // robust scaler fold-std <= standard scaler fold-std for SVC F1
    let rs_std = run.svc_multiple_rs.aggregate_for("SVC").unwrap().std[4];
    let ss_std = run.svc_multiple_ss.aggregate_for("SVC").unwrap().std[4];
    assert!(
        rs_std <= ss_std,
        "robust scaler F1 std ({rs_std:.4}) must not exceed standard ({ss_std:.4})"
    );

    assert!(
        run.wall.as_secs_f64() < 600.0,
        "protocol took {:?}, budget 10 min",
        run.wall
    );
    println!(
        "  ensemble BA {:.3}  AUC {:.3}  | SVC multiple {multiple:.3} vs single {single:.3} | \
         F1 std RS {rs_std:.4} vs SS {ss_std:.4}  ({:?})",
        ens.mean[0], ens.mean[5], run.wall
    );
    pass(8, "end-to-end synthetic protocol");
}

// ---------------------------------------------------------------------------
// criterion 9: null-model sanity
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_null_model() {
    // label-shuffled cohort: class signal destroyed, metrics must sit at
    // chance level
    let synth = generate_cohort(&SynthSpec {
        n_patients: 200,
        positive_fraction: 0.5,
        ..protocol_spec(9)
    })
    .unwrap();
    let mut cohort = synth.cohort;
    let mut labels: Vec<Label> = cohort.patients.iter().map(|p| p.label).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    labels.shuffle(&mut rng);
    for (p, l) in cohort.patients.iter_mut().zip(labels) {
        p.label = l;
    }

    let mut config = protocol_config(9);
    config.scope = Scope::Single(MassRangeId::R2);
    config.mode = AcquisitionMode::SingleAveraged;
    config.models = vec![ModelChoice::Ensemble];
    let processing = process_cohort(&cohort, &config.filter, config.scope).unwrap();
    let report = cross_validate(&processing, &config).unwrap();
    let ens = report.aggregate_for("Ens.").unwrap();
    assert!(
        (ens.mean[0] - 0.5).abs() <= 0.10,
        "shuffled-label balanced accuracy {} strays from 0.5",
        ens.mean[0]
    );
    assert!(
        (ens.mean[5] - 0.5).abs() <= 0.10,
        "shuffled-label ROC-AUC {} strays from 0.5",
        ens.mean[5]
    );
    pass(9, "null-model sanity");
}

// ---------------------------------------------------------------------------
// criterion 10: determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_determinism() {
    let first = protocol_run_cached();
    let second = run_protocol(PROTOCOL_SEED);
    assert_eq!(
        first.report_json, second.report_json,
        "same seed must produce byte-identical JSON reports"
    );
    assert_eq!(first.report_txt, second.report_txt);
    assert_eq!(
        serde_json::to_string(&first.svc_multiple_rs).unwrap(),
        serde_json::to_string(&second.svc_multiple_rs).unwrap()
    );
    pass(10, "determinism");
}
