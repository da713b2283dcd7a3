//! Spectral preprocessing: peak alignment, TIC plateau selection, plateau
//! averaging, outlier removal, TIC normalization, high-pass thresholds,
//! Savitzky-Golay filtering, and merging of the four mass ranges into the
//! whole 10-351 spectrum.
//!
//! All operations are pure; the cohort-level pass ([`process_cohort`]) takes
//! an immutable snapshot of the cohort and processes patients independently.

pub mod align;
pub mod plateau;
pub mod savgol;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Cohort, Label, MassRangeId, PatientStatus, RawAcquisition};
use crate::util::mean;

pub use align::{align_peaks, detect_peaks};
pub use plateau::{find_plateau, gradient, PlateauSelection, PLATEAU_WINDOW};
pub use savgol::{savgol_filter, savgol_kernel, SavGolError};

/// Integer bounds of the merged whole spectrum.
pub const MERGED_LO: u32 = 10;
pub const MERGED_HI: u32 = 351;

/// Grid identity of an aligned spectrum: one of the four instrument ranges or
/// the merged 10-351 grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumRange {
    Single(MassRangeId),
    Merged,
}

impl SpectrumRange {
    pub fn lo(self) -> u32 {
        match self {
            Self::Single(r) => r.lo(),
            Self::Merged => MERGED_LO,
        }
    }

    pub fn hi(self) -> u32 {
        match self {
            Self::Single(r) => r.hi(),
            Self::Merged => MERGED_HI,
        }
    }

    pub fn len(self) -> usize {
        (self.hi() - self.lo() + 1) as usize
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn label(self) -> String {
        match self {
            Self::Single(r) => r.to_string(),
            Self::Merged => "merged".to_string(),
        }
    }

    /// Integer m/z positions of this grid, ascending.
    pub fn grid(self) -> Vec<u32> {
        (self.lo()..=self.hi()).collect()
    }
}

/// Intensities on the integer m/z grid of one range (or the merged grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSpectrum {
    pub range: SpectrumRange,
    pub values: Vec<f64>,
}

impl AlignedSpectrum {
    pub fn zeros(range: SpectrumRange) -> Self {
        Self { range, values: vec![0.0; range.len()] }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Index of an integer m/z position on this grid.
    pub fn index_of(&self, mz: u32) -> Option<usize> {
        (self.range.lo()..=self.range.hi()).contains(&mz).then(|| (mz - self.range.lo()) as usize)
    }

    pub fn mz_at(&self, index: usize) -> u32 {
        self.range.lo() + index as u32
    }
}

/// Per-acquisition total ion current, ordered by acquisition index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TicCurve {
    pub values: Vec<f64>,
}

/// Filter-stage parameters. The two high-pass thresholds come from the
/// processing protocol (1e-4 before filtering, 1e-3 after); the
/// Savitzky-Golay windows are configurable, with the wide second window used
/// as a baseline estimate that is subtracted from the smoothed signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub sg_window: usize,
    pub sg_polyorder: usize,
    pub sg_deriv: usize,
    /// Wide window for the baseline pass; 0 disables baseline subtraction.
    pub baseline_window: usize,
    pub hp1: f64,
    pub hp2: f64,
    pub plateau_q: f64,
    pub z_thresh: f64,
    /// When false the Savitzky-Golay and threshold stages are skipped and
    /// spectra are only TIC-normalized.
    pub filter_enabled: bool,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            sg_window: 7,
            sg_polyorder: 3,
            sg_deriv: 0,
            baseline_window: 31,
            hp1: 1e-4,
            hp2: 1e-3,
            plateau_q: 0.5,
            z_thresh: 8.0,
            filter_enabled: true,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.sg_window < 3 || self.sg_window % 2 == 0 {
            return Err(PreprocessError::BadParams("sg window must be odd and >= 3".into()));
        }
        if self.sg_polyorder >= self.sg_window {
            return Err(PreprocessError::BadParams("sg polyorder must be < window".into()));
        }
        if self.baseline_window != 0 && (self.baseline_window % 2 == 0 || self.baseline_window < 3) {
            return Err(PreprocessError::BadParams("baseline window must be odd and >= 3".into()));
        }
        if self.hp1 >= self.hp2 {
            return Err(PreprocessError::BadParams("hp1 must be < hp2".into()));
        }
        if !(0.0..=1.0).contains(&self.plateau_q) {
            return Err(PreprocessError::BadParams("plateau quantile must be in [0, 1]".into()));
        }
        if self.z_thresh <= 0.0 {
            return Err(PreprocessError::BadParams("z threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("empty input")]
    EmptyInput,
    #[error("acquisition has no samples")]
    EmptySamples,
    #[error("no flat TIC run of length >= 4")]
    NoPlateau,
    #[error("plateau selection indexes acquisition {index} but only {available} exist")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("spectra in one TIC computation must share a range")]
    RangeMismatch,
    #[error(transparent)]
    Filter(#[from] SavGolError),
    #[error("merge needs the four range spectra on their nominal grids")]
    MissingRange,
    #[error("invalid preprocessing parameters: {0}")]
    BadParams(String),
}

/// TIC value per acquisition: the sum of all intensities of each spectrum.
pub fn compute_tic(acqs: &[AlignedSpectrum]) -> Result<TicCurve, PreprocessError> {
    if acqs.is_empty() {
        return Err(PreprocessError::EmptyInput);
    }
    if acqs.iter().any(|a| a.range != acqs[0].range) {
        return Err(PreprocessError::RangeMismatch);
    }
    Ok(TicCurve { values: acqs.iter().map(|a| a.sum()).collect() })
}

/// Pointwise arithmetic mean of the chosen acquisitions.
pub fn average_plateau(
    acqs: &[AlignedSpectrum],
    sel: &PlateauSelection,
) -> Result<AlignedSpectrum, PreprocessError> {
    for &i in &sel.chosen {
        if i >= acqs.len() {
            return Err(PreprocessError::IndexOutOfRange { index: i, available: acqs.len() });
        }
    }
    let range = acqs[sel.chosen[0]].range;
    let mut values = vec![0.0; range.len()];
    for &i in &sel.chosen {
        for (v, x) in values.iter_mut().zip(&acqs[i].values) {
            *v += x;
        }
    }
    let k = sel.chosen.len() as f64;
    for v in &mut values {
        *v /= k;
    }
    Ok(AlignedSpectrum { range, values })
}

/// Divides every intensity by the total so the spectrum sums to one; an
/// all-zero spectrum is returned unchanged.
pub fn tic_normalize(s: &AlignedSpectrum) -> AlignedSpectrum {
    let total = s.sum();
    if total <= 0.0 {
        return s.clone();
    }
    AlignedSpectrum {
        range: s.range,
        values: s.values.iter().map(|v| v / total).collect(),
    }
}

/// Zeroes every entry strictly below `threshold`.
pub fn highpass(s: &AlignedSpectrum, threshold: f64) -> AlignedSpectrum {
    AlignedSpectrum {
        range: s.range,
        values: s.values.iter().map(|&v| if v < threshold { 0.0 } else { v }).collect(),
    }
}

/// Savitzky-Golay pass over a spectrum.
pub fn savitzky_golay(
    s: &AlignedSpectrum,
    params: &FilterParams,
) -> Result<AlignedSpectrum, PreprocessError> {
    let values = savgol_filter(&s.values, params.sg_window, params.sg_polyorder, params.sg_deriv)?;
    Ok(AlignedSpectrum { range: s.range, values })
}

/// Marks cohort rows whose z-score exceeds `z_thresh` on at least one
/// feature. Features with zero standard deviation never trigger; with fewer
/// than two rows nothing can be computed and nothing is marked.
pub fn outlier_mask(rows: &[Vec<f64>], z_thresh: f64) -> Vec<bool> {
    let n = rows.len();
    if n < 2 {
        return vec![false; n];
    }
    let cols = rows[0].len();
    let mut mask = vec![false; n];
    for c in 0..cols {
        let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
        let m = mean(&col);
        let sd = crate::util::std_pop(&col);
        if sd == 0.0 {
            continue;
        }
        for (i, v) in col.iter().enumerate() {
            if ((v - m) / sd).abs() > z_thresh {
                mask[i] = true;
            }
        }
    }
    mask
}

/// Normalization + filter chain applied to one spectrum:
/// high-pass(hp1) -> Savitzky-Golay smoothing -> wide-window baseline
/// subtraction -> high-pass(hp2). Skipped entirely when filtering is off.
pub fn apply_filter_chain(
    s: &AlignedSpectrum,
    params: &FilterParams,
) -> Result<AlignedSpectrum, PreprocessError> {
    if !params.filter_enabled {
        return Ok(s.clone());
    }
    let s = highpass(s, params.hp1);
    let smoothed = savitzky_golay(&s, params)?;
    let detrended = if params.baseline_window == 0 {
        smoothed
    } else {
        let baseline = savgol_filter(
            &smoothed.values,
            params.baseline_window.min_odd(smoothed.values.len()),
            params.sg_polyorder,
            0,
        )?;
        AlignedSpectrum {
            range: smoothed.range,
            values: smoothed.values.iter().zip(&baseline).map(|(v, b)| v - b).collect(),
        }
    };
    Ok(highpass(&detrended, params.hp2))
}

trait MinOdd {
    fn min_odd(self, len: usize) -> usize;
}

impl MinOdd for usize {
    /// Clamp a window to the signal length, keeping it odd.
    fn min_odd(self, len: usize) -> usize {
        if self <= len {
            return self;
        }
        let mut w = if len % 2 == 0 { len.saturating_sub(1) } else { len };
        if w < 3 {
            w = 3;
        }
        w
    }
}

/// Full single-range composition for one patient: align -> plateau-select ->
/// average -> TIC-normalize -> filter chain.
pub fn preprocess_range(
    acqs: &[RawAcquisition],
    params: &FilterParams,
) -> Result<AlignedSpectrum, PreprocessError> {
    let stage = preprocess_range_stage(acqs, params)?;
    apply_filter_chain(&tic_normalize(&stage.averaged_raw), params)
}

/// Alignment and plateau selection for one range of one patient, keeping the
/// intermediate products needed by the cohort pipeline.
pub struct RangeStage {
    pub tic: TicCurve,
    pub selection: PlateauSelection,
    /// Plateau-averaged spectrum before normalization and filtering.
    pub averaged_raw: AlignedSpectrum,
    /// The chosen aligned acquisitions, unfiltered.
    pub chosen_raw: Vec<AlignedSpectrum>,
}

pub fn preprocess_range_stage(
    acqs: &[RawAcquisition],
    params: &FilterParams,
) -> Result<RangeStage, PreprocessError> {
    if acqs.is_empty() {
        return Err(PreprocessError::EmptyInput);
    }
    let aligned: Vec<AlignedSpectrum> = acqs.iter().map(align_peaks).collect::<Result<_, _>>()?;
    let tic = compute_tic(&aligned)?;
    let selection = find_plateau(&tic, params.plateau_q)?;
    let averaged_raw = average_plateau(&aligned, &selection)?;
    let chosen_raw = selection.chosen.iter().map(|&i| aligned[i].clone()).collect();
    Ok(RangeStage { tic, selection, averaged_raw, chosen_raw })
}

/// Combines the four per-range spectra into the whole 10-351 spectrum.
///
/// At the three-point overlaps between consecutive ranges the lower range
/// wins (its amplitude calibration covers the shared masses); the merged
/// vector is then renormalized to sum one.
pub fn merge_ranges(parts: [&AlignedSpectrum; 4]) -> Result<AlignedSpectrum, PreprocessError> {
    for (i, part) in parts.iter().enumerate() {
        let expected = MassRangeId::from_index(i).unwrap();
        match part.range {
            SpectrumRange::Single(r) if r == expected && part.values.len() == r.len() => {}
            _ => return Err(PreprocessError::MissingRange),
        }
    }
    let mut merged = AlignedSpectrum::zeros(SpectrumRange::Merged);
    // iterate low to high so earlier (lower) ranges win the overlaps
    let mut filled = vec![false; merged.values.len()];
    for part in parts {
        let lo = part.range.lo();
        for (k, &v) in part.values.iter().enumerate() {
            let g = (lo + k as u32 - MERGED_LO) as usize;
            if !filled[g] {
                merged.values[g] = v;
                filled[g] = true;
            }
        }
    }
    Ok(tic_normalize(&merged))
}

/// Experiment scope: a single instrument range or the merged whole spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    Whole,
    Single(MassRangeId),
}

impl Scope {
    pub fn ranges(self) -> Vec<MassRangeId> {
        match self {
            Self::Whole => MassRangeId::ALL.to_vec(),
            Self::Single(r) => vec![r],
        }
    }

    pub fn spectrum_range(self) -> SpectrumRange {
        match self {
            Self::Whole => SpectrumRange::Merged,
            Self::Single(r) => SpectrumRange::Single(r),
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "whole" | "merged" => Some(Self::Whole),
            other => MassRangeId::parse(other).map(Self::Single),
        }
    }

    pub fn label(self) -> String {
        match self {
            Self::Whole => "whole".into(),
            Self::Single(r) => r.to_string(),
        }
    }
}

/// One fully processed mass range of a retained patient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessedRange {
    pub selection: PlateauSelection,
    pub tic: TicCurve,
    /// Plateau average, normalized and filtered: the single-spectrum
    /// representation of the patient for this range.
    pub averaged: AlignedSpectrum,
    /// The chosen acquisitions, each normalized and filtered individually:
    /// the multiple-acquisition representation.
    pub acquisitions: Vec<AlignedSpectrum>,
}

/// A retained patient after the cohort pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessedPatient {
    pub patient_id: String,
    pub label: Label,
    /// One entry per range in `MassRangeId` order; `None` outside the scope.
    pub ranges: [Option<ProcessedRange>; 4],
}

impl ProcessedPatient {
    pub fn range(&self, r: MassRangeId) -> Option<&ProcessedRange> {
        self.ranges[r.index()].as_ref()
    }
}

/// Why a patient was dropped during the cohort pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscardReason {
    NoPlateau,
    Outlier,
    /// The patient has no acquisitions for a range required by the scope;
    /// such patients are excluded from whole-spectrum experiments.
    MissingRange,
}

impl DiscardReason {
    pub fn status(self) -> PatientStatus {
        match self {
            Self::NoPlateau | Self::MissingRange => PatientStatus::NoPlateau,
            Self::Outlier => PatientStatus::Outlier,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::NoPlateau => "no_plateau",
            Self::Outlier => "outlier",
            Self::MissingRange => "missing_range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscardEntry {
    pub patient_id: String,
    pub reason: DiscardReason,
}

/// Output of the cohort pass: retained patients (in input order) and the
/// discard log.
#[derive(Debug, Clone)]
pub struct CohortProcessing {
    pub patients: Vec<ProcessedPatient>,
    pub discarded: Vec<DiscardEntry>,
}

/// Runs the full preprocessing pass over a cohort for the given scope:
/// per-range alignment and plateau selection, the cohort-level z-score
/// outlier pass on TIC-normalized pre-filter spectra, then normalization and
/// filtering of the survivors.
pub fn process_cohort(
    cohort: &Cohort,
    params: &FilterParams,
    scope: Scope,
) -> Result<CohortProcessing, PreprocessError> {
    params.validate()?;
    let ranges = scope.ranges();

    struct Staged<'a> {
        patient: &'a crate::ingest::PatientRecord,
        stages: Vec<(MassRangeId, RangeStage)>,
    }

    let mut staged: Vec<Staged> = Vec::new();
    let mut discarded: Vec<DiscardEntry> = Vec::new();

    'patients: for patient in &cohort.patients {
        let mut stages = Vec::with_capacity(ranges.len());
        for &r in &ranges {
            let acqs = patient.acquisitions_for(r);
            if acqs.is_empty() {
                discarded.push(DiscardEntry {
                    patient_id: patient.patient_id.clone(),
                    reason: DiscardReason::MissingRange,
                });
                continue 'patients;
            }
            match preprocess_range_stage(acqs, params) {
                Ok(stage) => stages.push((r, stage)),
                Err(PreprocessError::NoPlateau) => {
                    discarded.push(DiscardEntry {
                        patient_id: patient.patient_id.clone(),
                        reason: DiscardReason::NoPlateau,
                    });
                    continue 'patients;
                }
                Err(other) => return Err(other),
            }
        }
        staged.push(Staged { patient, stages });
    }

    // cohort-level outlier pass on TIC-normalized, pre-filter features
    let feature_rows: Vec<Vec<f64>> = staged
        .iter()
        .map(|s| {
            let mut row = Vec::new();
            for (_, stage) in &s.stages {
                row.extend_from_slice(&tic_normalize(&stage.averaged_raw).values);
            }
            row
        })
        .collect();
    let mask = outlier_mask(&feature_rows, params.z_thresh);

    let mut patients = Vec::with_capacity(staged.len());
    for (s, &is_outlier) in staged.iter().zip(&mask) {
        if is_outlier {
            discarded.push(DiscardEntry {
                patient_id: s.patient.patient_id.clone(),
                reason: DiscardReason::Outlier,
            });
            continue;
        }
        let mut per_range: [Option<ProcessedRange>; 4] = Default::default();
        for (r, stage) in &s.stages {
            let averaged = apply_filter_chain(&tic_normalize(&stage.averaged_raw), params)?;
            let acquisitions = stage
                .chosen_raw
                .iter()
                .map(|a| apply_filter_chain(&tic_normalize(a), params))
                .collect::<Result<Vec<_>, _>>()?;
            per_range[r.index()] = Some(ProcessedRange {
                selection: stage.selection.clone(),
                tic: stage.tic.clone(),
                averaged,
                acquisitions,
            });
        }
        patients.push(ProcessedPatient {
            patient_id: s.patient.patient_id.clone(),
            label: s.patient.label,
            ranges: per_range,
        });
    }

    Ok(CohortProcessing { patients, discarded })
}
