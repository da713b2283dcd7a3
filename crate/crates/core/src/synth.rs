//! Deterministic synthetic-cohort generator with a ground-truth sidecar.
//!
//! The signal model is per-class Gaussian peaks on the integer m/z grid plus
//! a smooth low-frequency baseline plus bounded multiplicative noise; the TIC
//! rises over the first acquisitions (the pre-plateau ramp) and then
//! stabilizes. Every stochastic choice derives from the spec seed, so the
//! generated bytes are identical across runs.
//!
//! Ground-truth exactness: with `noise = 0` and `mz_jitter = 0` the plateau
//! interval and min-std window recorded in the truth sidecar match what the
//! pipeline recovers bit-for-bit. With `baseline_amp = 0` and `mz_jitter = 0`
//! the alignment is the identity on the sampled integer positions, so the
//! recorded TIC stays exact under per-bin noise as well. Injected anomalies
//! are construction-guaranteed: always-rising TIC patients use a period-four
//! increment pattern whose flat runs never reach length 4, and outlier
//! patients carry one peak scaled far beyond the cohort spread (the z-score
//! cannot exceed ~sqrt(n), so outlier detection needs cohorts of 70+).

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    serialize_acquisitions, Cohort, CohortManifest, Label, ManifestEntry, MassRangeId, MzSample,
    PatientRecord, RawAcquisition,
};
use crate::preprocess::{CohortProcessing, DiscardReason, PLATEAU_WINDOW};
use crate::util::derive_seed;

const SEED_STREAM_SYNTH: u64 = 0x53594e; // "SYN"
const PEAK_SIGMA: f64 = 0.35;

/// Shared dominant breath peaks in range 1, already scaled down for the
/// reduced detector amplification of that range.
const R1_SHARED: &[(f64, f64)] = &[(28.0, 2.0), (32.0, 1.3), (44.0, 2.6)];
/// Class profiles in range 2: the same masses with shifted relative
/// abundances. This is the only label signal; the shifts survive TIC
/// normalization because they change composition, not overall scale.
const R2_NEGATIVE: &[(f64, f64)] = &[
    (60.0, 1.0),
    (72.0, 0.85),
    (88.0, 0.7),
    (104.0, 0.55),
    (112.0, 0.3),
    (120.0, 0.45),
    (136.0, 0.35),
];
const R2_POSITIVE: &[(f64, f64)] = &[
    (60.0, 0.5),
    (72.0, 1.06),
    (88.0, 1.05),
    (104.0, 0.38),
    (112.0, 0.3),
    (120.0, 0.63),
    (136.0, 0.35),
];
/// Patient-level heavy-tail factor: with probability `spike_rate` per peak, a
/// patient carries that mass at several times the usual abundance
/// (diet/contaminant variability). This is what makes robust scaling earn
/// its keep; the spike multiplies every acquisition of the patient equally,
/// so TIC plateau structure is unaffected.
const SPIKE_FACTOR: f64 = 3.5;
const R3_SHARED: &[(f64, f64)] = &[(163.0, 0.5), (220.0, 0.34)];
const R4_SHARED: &[(f64, f64)] = &[(258.0, 0.4), (340.0, 0.24)];

/// Masses carried by only a minority of patients (contaminants, diet).
/// Sparse features like these are why the robust scaler exists: absent in
/// most patients they have zero interquartile range and pass through at
/// negligible raw scale, while standard scaling inflates their rare extremes
/// into unit-variance noise.
const RARE_MASSES: [(MassRangeId, f64); 7] = [
    (MassRangeId::R2, 64.0),
    (MassRangeId::R2, 68.0),
    (MassRangeId::R2, 96.0),
    (MassRangeId::R2, 128.0),
    (MassRangeId::R2, 144.0),
    (MassRangeId::R3, 205.0),
    (MassRangeId::R4, 270.0),
];
const RARE_AMP: f64 = 1.4;

/// Biological stability per range: the dominant atmospheric components of
/// range 1 vary far less between patients than the organic masses above.
fn variation_damping(range: MassRangeId) -> f64 {
    match range {
        MassRangeId::R1 => 0.3,
        MassRangeId::R2 => 1.0,
        MassRangeId::R3 | MassRangeId::R4 => 0.6,
    }
}

/// How strongly injected outlier patients exaggerate one of their range-2
/// peaks. The exaggerated mass rotates across outlier patients (coincident
/// outliers on one feature mask each other: k outliers sharing a feature cap
/// the z-score at ~sqrt(n/k)) and is drawn from the class-neutral masses,
/// whose cohort spread is not inflated by the class separation.
const OUTLIER_PEAK_FACTOR: f64 = 25.0;
const OUTLIER_MASSES: [f64; 4] = [72.0, 104.0, 112.0, 136.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_patients: usize,
    pub positive_fraction: f64,
    /// Acquisitions per patient, drawn uniformly from this inclusive range.
    pub acq_min: usize,
    pub acq_max: usize,
    /// Pre-plateau ramp length range (1..=3 acquisitions).
    pub ramp_min: usize,
    pub ramp_max: usize,
    /// Bounded multiplicative noise level: per-acquisition TIC jitter and
    /// per-sample intensity jitter are both uniform within +/- this fraction.
    pub noise: f64,
    /// Smooth baseline amplitude relative to the unit peak scale.
    pub baseline_amp: f64,
    /// Per-acquisition, per-peak m/z jitter bound (exercises alignment).
    pub mz_jitter: f64,
    /// Raw sampling step in m/z; must evenly divide every range width.
    pub sample_step: f64,
    /// Patient-level peak amplitude variation (biological variability).
    pub peak_variation: f64,
    /// Probability that a patient carries any given peak at `SPIKE_FACTOR`
    /// times the usual abundance (heavy-tailed biology; 0 disables).
    pub spike_rate: f64,
    /// Probability that a patient carries each rare (sparse) mass; 0 removes
    /// the rare masses entirely.
    pub rare_peak_rate: f64,
    pub outlier_rate: f64,
    pub no_plateau_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n_patients: 100,
            positive_fraction: 0.3,
            acq_min: 10,
            acq_max: 20,
            ramp_min: 1,
            ramp_max: 3,
            noise: 0.08,
            baseline_amp: 0.15,
            mz_jitter: 0.3,
            sample_step: 0.25,
            peak_variation: 0.2,
            spike_rate: 0.0,
            rare_peak_rate: 0.0,
            outlier_rate: 0.0,
            no_plateau_rate: 0.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: &str| Err(SynthError::InvalidSpec(msg.to_string()));
        if self.n_patients == 0 {
            return fail("need at least one patient");
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return fail("positive fraction must be in (0, 1)");
        }
        if self.ramp_min < 1 || self.ramp_max > 3 || self.ramp_min > self.ramp_max {
            return fail("ramp length must satisfy 1 <= min <= max <= 3");
        }
        if self.acq_min > self.acq_max {
            return fail("acquisition count range inverted");
        }
        if self.acq_min < self.ramp_max + PLATEAU_WINDOW + 1 {
            return fail("too few acquisitions to hold a ramp plus a 4-plateau");
        }
        if self.noise < 0.0 || self.noise >= 0.5 {
            return fail("noise must be in [0, 0.5)");
        }
        if self.mz_jitter < 0.0 || self.mz_jitter > 0.45 {
            return fail("m/z jitter must be in [0, 0.45]");
        }
        if self.sample_step <= 0.0 {
            return fail("sample step must be positive");
        }
        for r in MassRangeId::ALL {
            let width = (r.hi() - r.lo()) as f64;
            let steps = width / self.sample_step;
            if (steps - steps.round()).abs() > 1e-9 {
                return fail("sample step must evenly divide every range width");
            }
        }
        if self.peak_variation < 0.0 || self.peak_variation >= 1.0 {
            return fail("peak variation must be in [0, 1)");
        }
        if !(0.0..=0.5).contains(&self.outlier_rate) || !(0.0..=0.5).contains(&self.no_plateau_rate)
        {
            return fail("injection rates must be in [0, 0.5]");
        }
        if !(0.0..=0.5).contains(&self.spike_rate) {
            return fail("spike rate must be in [0, 0.5]");
        }
        if !(0.0..=0.9).contains(&self.rare_peak_rate) {
            return fail("rare peak rate must be in [0, 0.9]");
        }
        Ok(())
    }
}

/// What, if anything, was injected into a patient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Injection {
    None,
    Outlier,
    NoPlateau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientTruth {
    pub patient_id: String,
    pub label: Label,
    pub acq_count: usize,
    pub ramp_len: usize,
    /// Detectable flat interval of the TIC under central differencing,
    /// inclusive; `None` for injected no-plateau patients.
    pub plateau: Option<(usize, usize)>,
    /// Start of the min-std window of 4 inside the plateau, per range.
    pub chosen_start: [Option<usize>; 4],
    /// True integer peak positions per range.
    pub peaks: [Vec<u32>; 4],
    pub injected: Injection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub format_version: u32,
    pub patients: Vec<PatientTruth>,
}

/// A generated cohort: in-memory records, the equivalent file set, and the
/// ground-truth sidecar.
#[derive(Debug, Clone)]
pub struct SynthCohort {
    pub manifest: CohortManifest,
    pub cohort: Cohort,
    /// (file name, file contents), one acquisition file per patient.
    pub files: Vec<(String, String)>,
    pub truth: GroundTruth,
}

impl SynthCohort {
    /// Writes manifest.json, truth.json and the per-patient acquisition
    /// files; bytes are identical for identical specs.
    pub fn write_to_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let manifest = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        std::fs::write(dir.join("manifest.json"), manifest)?;
        let truth = serde_json::to_string_pretty(&self.truth).expect("serializable");
        std::fs::write(dir.join("truth.json"), truth)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn range_peaks(range: MassRangeId, label: Label) -> &'static [(f64, f64)] {
    match range {
        MassRangeId::R1 => R1_SHARED,
        MassRangeId::R2 => {
            if label.is_positive() {
                R2_POSITIVE
            } else {
                R2_NEGATIVE
            }
        }
        MassRangeId::R3 => R3_SHARED,
        MassRangeId::R4 => R4_SHARED,
    }
}

/// Generates the full cohort deterministically from the spec.
pub fn generate_cohort(spec: &SynthSpec) -> Result<SynthCohort, SynthError> {
    spec.validate()?;

    let n = spec.n_patients;
    let n_pos = ((n as f64) * spec.positive_fraction).round() as usize;
    let n_outlier = ((n as f64) * spec.outlier_rate).round() as usize;
    let n_no_plateau = ((n as f64) * spec.no_plateau_rate).round() as usize;

    // master rng fixes labels and injection targets
    let mut master = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SEED_STREAM_SYNTH, u64::MAX));
    let mut labels = vec![Label::Negative; n];
    for l in labels.iter_mut().take(n_pos) {
        *l = Label::Positive;
    }
    use rand::seq::SliceRandom;
    labels.shuffle(&mut master);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut master);
    let mut injections = vec![Injection::None; n];
    for &i in order.iter().take(n_no_plateau) {
        injections[i] = Injection::NoPlateau;
    }
    for &i in order.iter().skip(n_no_plateau).take(n_outlier) {
        injections[i] = Injection::Outlier;
    }

    let mut patients = Vec::with_capacity(n);
    let mut truths = Vec::with_capacity(n);
    let mut files = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n);

    for idx in 0..n {
        let patient_id = format!("SP{idx:04}");
        let label = labels[idx];
        let injected = injections[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, SEED_STREAM_SYNTH, idx as u64));

        let acq_count = rng.gen_range(spec.acq_min..=spec.acq_max);
        let ramp_len = rng.gen_range(spec.ramp_min..=spec.ramp_max);

        // per-patient biology: one multiplier per peak per range, and a
        // baseline phase per range
        let mut patient_peaks: [Vec<(f64, f64)>; 4] = Default::default();
        let mut phases = [0.0f64; 4];
        for r in MassRangeId::ALL {
            let damping = variation_damping(r);
            let v = spec.peak_variation * damping;
            let mut peaks: Vec<(f64, f64)> = range_peaks(r, label)
                .iter()
                .map(|&(mz, amp)| {
                    let mut m = 1.0 + rng.gen_range(-v..=v);
                    // draws happen for every peak so the random stream does
                    // not depend on outcomes
                    if rng.gen_range(0.0..1.0) < spec.spike_rate {
                        m *= SPIKE_FACTOR;
                    }
                    (mz, amp * m)
                })
                .collect();
            if spec.rare_peak_rate > 0.0 {
                for &(rr, mz) in RARE_MASSES.iter().filter(|&&(rr, _)| rr == r) {
                    let present = rng.gen_range(0.0..1.0) < spec.rare_peak_rate;
                    let m = 1.0 + rng.gen_range(-spec.peak_variation..=spec.peak_variation);
                    if present {
                        peaks.push((mz, RARE_AMP * m));
                        let _ = rr;
                    }
                }
                peaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            }
            patient_peaks[r.index()] = peaks;
            phases[r.index()] = rng.gen_range(0.0..std::f64::consts::TAU);
        }
        if injected == Injection::Outlier {
            let r2 = &mut patient_peaks[MassRangeId::R2.index()];
            let ordinal =
                injections[..idx].iter().filter(|&&i| i == Injection::Outlier).count();
            let mass = OUTLIER_MASSES[ordinal % OUTLIER_MASSES.len()];
            if let Some(peak) = r2.iter_mut().find(|(mz, _)| *mz == mass) {
                peak.1 *= OUTLIER_PEAK_FACTOR;
            }
        }

        // acquisition scale profile: ramp then plateau (or always-rising)
        let scales: Vec<f64> = match injected {
            Injection::NoPlateau => {
                // period-four increments [t, t, B, B]: always rising, and the
                // central-difference flat runs never reach length 4
                let (t, b) = (0.02, 0.4);
                let mut s = 0.3;
                let mut out = Vec::with_capacity(acq_count);
                for i in 0..acq_count {
                    out.push(s);
                    s += if i % 4 < 2 { t } else { b };
                }
                out
            }
            _ => (0..acq_count)
                .map(|i| {
                    if i < ramp_len {
                        0.25 + 0.4 * i as f64 / ramp_len.max(1) as f64
                    } else if spec.noise > 0.0 {
                        1.0 + rng.gen_range(-spec.noise..=spec.noise)
                    } else {
                        1.0
                    }
                })
                .collect(),
        };

        // generate the acquisitions and accumulate the integer-bin TIC truth
        let mut record = PatientRecord::new(patient_id.clone(), label);
        let mut truth_tics: [Vec<f64>; 4] = Default::default();
        for r in MassRangeId::ALL {
            let peaks = &patient_peaks[r.index()];
            let lo = r.lo() as f64;
            let hi = r.hi() as f64;
            let width = hi - lo;
            let n_steps = (width / spec.sample_step).round() as usize;
            for (acq_idx, &scale) in scales.iter().enumerate() {
                let jitters: Vec<f64> = peaks
                    .iter()
                    .map(|_| {
                        if spec.mz_jitter > 0.0 {
                            rng.gen_range(-spec.mz_jitter..=spec.mz_jitter)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let mut samples = Vec::with_capacity(n_steps + 1);
                let mut tic = 0.0;
                for j in 0..=n_steps {
                    let p = lo + j as f64 * spec.sample_step;
                    let mut signal = 0.0;
                    for (k, &(mz, amp)) in peaks.iter().enumerate() {
                        let d = p - mz - jitters[k];
                        signal += amp * (-d * d / (2.0 * PEAK_SIGMA * PEAK_SIGMA)).exp();
                    }
                    if spec.noise > 0.0 {
                        signal *= 1.0 + rng.gen_range(-spec.noise..=spec.noise);
                    }
                    let baseline = spec.baseline_amp
                        * (0.5 + 0.5 * (std::f64::consts::TAU * (p - lo) / width
                            + phases[r.index()])
                        .sin());
                    let y = scale * (signal + baseline);
                    if p.fract() == 0.0 {
                        tic += y;
                    }
                    samples.push(MzSample { mz: p, intensity: y });
                }
                truth_tics[r.index()].push(tic);
                record.acquisitions[r.index()].push(RawAcquisition {
                    patient_id: patient_id.clone(),
                    range: r,
                    index: acq_idx,
                    samples,
                });
            }
        }

        // construction-derived truth
        let plateau = match injected {
            Injection::NoPlateau => None,
            _ => Some((ramp_len + 1, acq_count - 1)),
        };
        let mut chosen_start: [Option<usize>; 4] = Default::default();
        if let Some((start, end)) = plateau {
            for r in MassRangeId::ALL {
                chosen_start[r.index()] =
                    Some(min_std_window(&truth_tics[r.index()], start, end));
            }
        }
        let peaks_truth: [Vec<u32>; 4] =
            std::array::from_fn(|k| patient_peaks[k].iter().map(|&(mz, _)| mz as u32).collect());

        let file_name = format!("{patient_id}.csv");
        files.push((file_name.clone(), serialize_acquisitions(
            &record
                .acquisitions
                .iter()
                .flat_map(|v| v.iter().cloned())
                .collect::<Vec<_>>(),
        )));
        entries.push(ManifestEntry { id: patient_id.clone(), label, files: vec![file_name] });
        truths.push(PatientTruth {
            patient_id,
            label,
            acq_count,
            ramp_len,
            plateau,
            chosen_start,
            peaks: peaks_truth,
            injected,
        });
        patients.push(record);
    }

    Ok(SynthCohort {
        manifest: CohortManifest::new(entries),
        cohort: Cohort { patients },
        files,
        truth: GroundTruth { format_version: 1, patients: truths },
    })
}

/// Brute-force min-std window of 4 over `values[start..=end]`, earliest on
/// tie. Uses the moment form of the variance, deliberately a different
/// arithmetic path from the pipeline's two-pass computation.
fn min_std_window(values: &[f64], start: usize, end: usize) -> usize {
    let mut best = (f64::INFINITY, start);
    for w in start..=end.saturating_sub(PLATEAU_WINDOW - 1) {
        let window = &values[w..w + PLATEAU_WINDOW];
        let m = window.iter().sum::<f64>() / PLATEAU_WINDOW as f64;
        let m2 = window.iter().map(|v| v * v).sum::<f64>() / PLATEAU_WINDOW as f64;
        let var = (m2 - m * m).max(0.0);
        if var < best.0 {
            best = (var, w);
        }
    }
    best.1
}

/// One disagreement between pipeline output and generator truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Discrepancy {
    /// Patient expected retained but discarded, or vice versa.
    WrongDisposal { patient_id: String, expected: String, found: String },
    PlateauMismatch {
        patient_id: String,
        range: MassRangeId,
        expected: (usize, usize),
        found: (usize, usize),
    },
    ChosenMismatch { patient_id: String, range: MassRangeId, expected: usize, found: usize },
    PeakMisaligned { patient_id: String, range: MassRangeId, acq: usize, mz: u32 },
}

impl std::fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::WrongDisposal { patient_id, expected, found } => {
                write!(f, "{patient_id}: expected {expected}, found {found}")
            }
            Self::PlateauMismatch { patient_id, range, expected, found } => write!(
                f,
                "{patient_id} {range}: plateau {found:?}, truth {expected:?}"
            ),
            Self::ChosenMismatch { patient_id, range, expected, found } => {
                write!(f, "{patient_id} {range}: chosen window {found}, truth {expected}")
            }
            Self::PeakMisaligned { patient_id, range, acq, mz } => {
                write!(f, "{patient_id} {range} acq {acq}: peak not anchored at {mz}")
            }
        }
    }
}

/// Compares pipeline outputs against the generator truth: disposal of every
/// patient (retained / no-plateau / outlier), recovered plateau intervals and
/// min-std windows. Zero discrepancies expected in the exact regimes.
pub fn ground_truth_check(
    processing: &CohortProcessing,
    truth: &GroundTruth,
) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    for t in &truth.patients {
        let discarded = processing.discarded.iter().find(|d| d.patient_id == t.patient_id);
        let retained = processing.patients.iter().find(|p| p.patient_id == t.patient_id);
        let expected = match t.injected {
            Injection::None => "retained",
            Injection::Outlier => "outlier",
            Injection::NoPlateau => "no_plateau",
        };
        let found = match (&retained, &discarded) {
            (Some(_), None) => "retained".to_string(),
            (None, Some(d)) => match d.reason {
                DiscardReason::NoPlateau => "no_plateau".to_string(),
                DiscardReason::Outlier => "outlier".to_string(),
                DiscardReason::MissingRange => "missing_range".to_string(),
            },
            _ => "unknown".to_string(),
        };
        if expected != found {
            out.push(Discrepancy::WrongDisposal {
                patient_id: t.patient_id.clone(),
                expected: expected.to_string(),
                found,
            });
            continue;
        }
        let Some(p) = retained else { continue };
        let Some(truth_plateau) = t.plateau else { continue };
        for r in MassRangeId::ALL {
            let Some(pr) = p.range(r) else { continue };
            if pr.selection.plateau != truth_plateau {
                out.push(Discrepancy::PlateauMismatch {
                    patient_id: t.patient_id.clone(),
                    range: r,
                    expected: truth_plateau,
                    found: pr.selection.plateau,
                });
            }
            if let Some(expected_start) = t.chosen_start[r.index()] {
                if pr.selection.chosen[0] != expected_start {
                    out.push(Discrepancy::ChosenMismatch {
                        patient_id: t.patient_id.clone(),
                        range: r,
                        expected: expected_start,
                        found: pr.selection.chosen[0],
                    });
                }
            }
        }
    }
    out
}

/// Verifies that every true peak of every acquisition lands on its integer
/// bin after alignment (the bin holds a local maximum with the apex value).
pub fn check_aligned_peaks(cohort: &Cohort, truth: &GroundTruth) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    for (record, t) in cohort.patients.iter().zip(&truth.patients) {
        for r in MassRangeId::ALL {
            for acq in record.acquisitions_for(r) {
                let Ok(aligned) = crate::preprocess::align_peaks(acq) else {
                    continue;
                };
                for &mz in &t.peaks[r.index()] {
                    let Some(i) = aligned.index_of(mz) else { continue };
                    let v = aligned.values[i];
                    let left = if i > 0 { aligned.values[i - 1] } else { f64::NEG_INFINITY };
                    let right = if i + 1 < aligned.values.len() {
                        aligned.values[i + 1]
                    } else {
                        f64::NEG_INFINITY
                    };
                    if !(v >= left && v >= right && v > 0.0) {
                        out.push(Discrepancy::PeakMisaligned {
                            patient_id: record.patient_id.clone(),
                            range: r,
                            acq: acq.index,
                            mz,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Renders the discrepancy report, one line each.
pub fn render_discrepancies(discrepancies: &[Discrepancy]) -> String {
    let mut out = String::new();
    for d in discrepancies {
        let _ = writeln!(out, "{d}");
    }
    out
}
