//! Dataset construction: one averaged spectrum per patient, or the cartesian
//! product of per-range acquisitions ("artificial patients"), plus the
//! test-time aggregation used for prediction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{encode_combo, FeatureIndex, FeatureMatrix, FeatureRow};
use crate::ingest::{Label, MassRangeId};
use crate::preprocess::{merge_ranges, AlignedSpectrum, ProcessedPatient, Scope};

/// Cap on pseudo-patients generated for a single patient. The cartesian
/// product is truncated deterministically in lexicographic combination order;
/// instruments produce at most ~20 acquisitions per range, so the default is
/// never hit in practice, but adversarial input must not exhaust memory.
pub const DEFAULT_COMBO_CAP: usize = 10_000;

/// Training-row construction mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcquisitionMode {
    /// One plateau-averaged spectrum per patient.
    SingleAveraged,
    /// One row per combination of per-range acquisitions.
    MultipleAugmented,
}

impl AcquisitionMode {
    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "single" => Some(Self::SingleAveraged),
            "multiple" => Some(Self::MultipleAugmented),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::SingleAveraged => "single",
            Self::MultipleAugmented => "multiple",
        }
    }
}

/// An augmented sample: one combination of per-range acquisitions of a real
/// patient.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPatient {
    pub origin: String,
    pub combo: [usize; 4],
    pub spectrum: AlignedSpectrum,
    pub label: Label,
}

impl PseudoPatient {
    /// `patient-AAAA` style id; letters index the chosen acquisitions.
    pub fn id(&self) -> String {
        format!("{}-{}", self.origin, encode_combo(&self.combo))
    }
}

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("patient '{patient}' has no retained acquisitions for {range}")]
    EmptyRange { patient: String, range: MassRangeId },
    #[error("empty cohort")]
    EmptyCohort,
    #[error("patient '{patient}' is missing processed data for {range}")]
    MissingRange { patient: String, range: MassRangeId },
    #[error(transparent)]
    Preprocess(#[from] crate::preprocess::PreprocessError),
}

/// All combinations of the patient's retained per-range acquisitions, in
/// lexicographic combination order, truncated at `cap`.
///
/// The output size is the product of the per-range retained counts (or `cap`
/// if smaller); each pseudo-patient's spectrum is the merged whole spectrum
/// of its combination.
pub fn augment_patient(
    patient: &ProcessedPatient,
    cap: usize,
) -> Result<Vec<PseudoPatient>, AugmentError> {
    let mut counts = [0usize; 4];
    for r in MassRangeId::ALL {
        let pr = patient.range(r).ok_or(AugmentError::MissingRange {
            patient: patient.patient_id.clone(),
            range: r,
        })?;
        if pr.acquisitions.is_empty() {
            return Err(AugmentError::EmptyRange {
                patient: patient.patient_id.clone(),
                range: r,
            });
        }
        counts[r.index()] = pr.acquisitions.len();
    }

    let total: usize = counts.iter().product();
    let n = total.min(cap);
    let mut out = Vec::with_capacity(n);
    let mut combo = [0usize; 4];
    for _ in 0..n {
        let parts: [&AlignedSpectrum; 4] = std::array::from_fn(|k| {
            &patient.ranges[k].as_ref().unwrap().acquisitions[combo[k]]
        });
        let spectrum = merge_ranges(parts)?;
        out.push(PseudoPatient {
            origin: patient.patient_id.clone(),
            combo,
            spectrum,
            label: patient.label,
        });
        // next combination, last range fastest
        for k in (0..4).rev() {
            combo[k] += 1;
            if combo[k] < counts[k] {
                break;
            }
            combo[k] = 0;
        }
    }
    Ok(out)
}

/// Feature vector of one processed patient for a scope: the merged whole
/// spectrum or the single range's spectrum.
fn averaged_vector(patient: &ProcessedPatient, scope: Scope) -> Result<Vec<f64>, AugmentError> {
    match scope {
        Scope::Whole => {
            let parts: [&AlignedSpectrum; 4] = collect_parts(patient, |pr| &pr.averaged)?;
            Ok(merge_ranges(parts)?.values)
        }
        Scope::Single(r) => {
            let pr = patient.range(r).ok_or(AugmentError::MissingRange {
                patient: patient.patient_id.clone(),
                range: r,
            })?;
            Ok(pr.averaged.values.clone())
        }
    }
}

fn collect_parts<'a>(
    patient: &'a ProcessedPatient,
    f: impl Fn(&'a crate::preprocess::ProcessedRange) -> &'a AlignedSpectrum,
) -> Result<[&'a AlignedSpectrum; 4], AugmentError> {
    for r in MassRangeId::ALL {
        if patient.range(r).is_none() {
            return Err(AugmentError::MissingRange {
                patient: patient.patient_id.clone(),
                range: r,
            });
        }
    }
    Ok(std::array::from_fn(|k| f(patient.ranges[k].as_ref().unwrap())))
}

/// Builds the training matrix for a cohort.
///
/// `SingleAveraged` yields one row per patient; `MultipleAugmented` yields one
/// row per pseudo-patient (for a single-range scope, one row per retained
/// acquisition of that range). Row order is patient order, then combination
/// order, so re-running produces an identical matrix.
pub fn build_training_matrix(
    cohort: &[ProcessedPatient],
    scope: Scope,
    mode: AcquisitionMode,
    cap: usize,
) -> Result<FeatureMatrix, AugmentError> {
    if cohort.is_empty() {
        return Err(AugmentError::EmptyCohort);
    }
    let feature_index = FeatureIndex::MzBins(scope.spectrum_range().grid());
    let mut rows = Vec::new();
    for patient in cohort {
        match (mode, scope) {
            (AcquisitionMode::SingleAveraged, _) => rows.push(FeatureRow {
                origin: patient.patient_id.clone(),
                label: patient.label,
                combo: None,
                values: averaged_vector(patient, scope)?,
            }),
            (AcquisitionMode::MultipleAugmented, Scope::Whole) => {
                for pseudo in augment_patient(patient, cap)? {
                    rows.push(FeatureRow {
                        origin: pseudo.origin.clone(),
                        label: pseudo.label,
                        combo: Some(encode_combo(&pseudo.combo)),
                        values: pseudo.spectrum.values,
                    });
                }
            }
            (AcquisitionMode::MultipleAugmented, Scope::Single(r)) => {
                let pr = patient.range(r).ok_or(AugmentError::MissingRange {
                    patient: patient.patient_id.clone(),
                    range: r,
                })?;
                if pr.acquisitions.is_empty() {
                    return Err(AugmentError::EmptyRange {
                        patient: patient.patient_id.clone(),
                        range: r,
                    });
                }
                for (i, acq) in pr.acquisitions.iter().enumerate().take(cap) {
                    rows.push(FeatureRow {
                        origin: patient.patient_id.clone(),
                        label: patient.label,
                        combo: Some(encode_combo(&[i])),
                        values: acq.values.clone(),
                    });
                }
            }
        }
    }
    Ok(FeatureMatrix { feature_index, rows })
}

/// Test-time representation of a patient: one vector regardless of the
/// training mode, equal to the `SingleAveraged` representation (the plateau
/// average, normalized and filtered, merged for the whole scope).
pub fn test_time_aggregate(
    patient: &ProcessedPatient,
    scope: Scope,
) -> Result<Vec<f64>, AugmentError> {
    averaged_vector(patient, scope)
}
