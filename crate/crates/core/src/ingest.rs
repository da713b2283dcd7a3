//! Parsing, validation and persistence of raw acquisition files and cohort
//! manifests.
//!
//! The acquisition file format is plain UTF-8 CSV with header
//! `patient_id,range,acq_index,mz,intensity`, one sample per row, rows grouped
//! by acquisition with m/z ascending within a group. The cohort manifest is a
//! JSON file listing patient ids, labels and the acquisition files belonging
//! to each patient.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Manifest schema version accepted by this build.
pub const MANIFEST_VERSION: u32 = 1;

/// The four instrument mass ranges.
///
/// Consecutive ranges overlap on exactly three integer m/z positions; the
/// first range runs with reduced detector amplification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MassRangeId {
    R1,
    R2,
    R3,
    R4,
}

impl MassRangeId {
    pub const ALL: [MassRangeId; 4] = [Self::R1, Self::R2, Self::R3, Self::R4];

    /// Lower integer m/z bound (inclusive).
    pub fn lo(self) -> u32 {
        match self {
            Self::R1 => 10,
            Self::R2 => 49,
            Self::R3 => 149,
            Self::R4 => 249,
        }
    }

    /// Upper integer m/z bound (inclusive).
    pub fn hi(self) -> u32 {
        match self {
            Self::R1 => 51,
            Self::R2 => 151,
            Self::R3 => 251,
            Self::R4 => 351,
        }
    }

    /// Instrument acquisition time in seconds.
    pub fn acquisition_time_s(self) -> u32 {
        match self {
            Self::R1 => 10,
            _ => 14,
        }
    }

    /// Electron-multiplier voltage in volts.
    pub fn em_voltage_v(self) -> u32 {
        match self {
            Self::R1 => 1000,
            _ => 1800,
        }
    }

    /// Number of integer m/z positions in the range.
    pub fn len(self) -> usize {
        (self.hi() - self.lo() + 1) as usize
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn index(self) -> usize {
        match self {
            Self::R1 => 0,
            Self::R2 => 1,
            Self::R3 => 2,
            Self::R4 => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_uppercase().as_str() {
            "R1" => Some(Self::R1),
            "R2" => Some(Self::R2),
            "R3" => Some(Self::R3),
            "R4" => Some(Self::R4),
            _ => None,
        }
    }
}

impl fmt::Display for MassRangeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::R1 => "R1",
            Self::R2 => "R2",
            Self::R3 => "R3",
            Self::R4 => "R4",
        };
        f.write_str(s)
    }
}

/// Binary classification label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "positive" => Some(Self::Positive),
            "negative" => Some(Self::Negative),
            _ => None,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Self::Positive)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Negative => "negative",
            Self::Positive => "positive",
        })
    }
}

/// One (m/z, intensity) sample of a raw sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MzSample {
    pub mz: f64,
    pub intensity: f64,
}

/// One instrument sweep: ordered samples for one patient and one mass range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAcquisition {
    pub patient_id: String,
    pub range: MassRangeId,
    pub index: usize,
    pub samples: Vec<MzSample>,
}

/// Processing status of a patient record. Discarded records never re-enter a
/// dataset; the only transitions are `Ok -> NoPlateau` and `Ok -> Outlier`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatientStatus {
    Ok,
    NoPlateau,
    Outlier,
}

impl fmt::Display for PatientStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::NoPlateau => "no_plateau",
            Self::Outlier => "outlier",
        })
    }
}

/// A patient with all of its raw acquisitions, keyed by mass range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub patient_id: String,
    pub label: Label,
    /// Acquisition lists indexed by `MassRangeId::index()`.
    pub acquisitions: [Vec<RawAcquisition>; 4],
    pub status: PatientStatus,
}

impl PatientRecord {
    pub fn new(patient_id: String, label: Label) -> Self {
        Self {
            patient_id,
            label,
            acquisitions: Default::default(),
            status: PatientStatus::Ok,
        }
    }

    pub fn acquisitions_for(&self, range: MassRangeId) -> &[RawAcquisition] {
        &self.acquisitions[range.index()]
    }

    /// True when every mass range has at least one acquisition; required for
    /// whole-spectrum experiments.
    pub fn has_all_ranges(&self) -> bool {
        self.acquisitions.iter().all(|a| !a.is_empty())
    }
}

/// Entry of a cohort manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub label: Label,
    pub files: Vec<String>,
}

/// Cohort manifest: the list of patients and their acquisition files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub format_version: u32,
    pub patients: Vec<ManifestEntry>,
}

impl CohortManifest {
    pub fn new(patients: Vec<ManifestEntry>) -> Self {
        Self { format_version: MANIFEST_VERSION, patients }
    }
}

/// A loaded cohort with its label counts.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub patients: Vec<PatientRecord>,
}

impl Cohort {
    /// (positives, negatives)
    pub fn label_counts(&self) -> (usize, usize) {
        let pos = self.patients.iter().filter(|p| p.label.is_positive()).count();
        (pos, self.patients.len() - pos)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow { path: String, line: usize, reason: String },
    #[error("{path}:{line}: m/z not strictly increasing ({prev} then {cur})")]
    NonMonotonicMz { path: String, line: usize, prev: f64, cur: f64 },
    #[error("{path}:{line}: negative intensity {value}")]
    NegativeIntensity { path: String, line: usize, value: f64 },
    #[error("{path}:{line}: unknown mass range '{token}'")]
    UnknownRange { path: String, line: usize, token: String },
    #[error("patient '{patient}' range {range}: acquisition indices must be 0..n-1, found {found:?}")]
    AcquisitionIndexGap { patient: String, range: MassRangeId, found: Vec<usize> },
    #[error("duplicate patient id '{0}' in manifest")]
    DuplicatePatient(String),
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("io failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("manifest parse error: {0}")]
    BadManifest(String),
}

const HEADER: &str = "patient_id,range,acq_index,mz,intensity";

/// Parses an acquisition file into raw acquisitions grouped and ordered by
/// `(patient_id, range, index)`.
///
/// Rejects unsorted m/z within a group, negative intensities, unknown range
/// tokens, m/z outside the range catchment (nominal bounds +/- 0.5) and
/// acquisition index gaps.
pub fn parse_acquisition_file(path: &Path) -> Result<Vec<RawAcquisition>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            IngestError::MissingFile(path.to_path_buf())
        } else {
            IngestError::IoFailure { path: path.to_path_buf(), source }
        }
    })?;
    parse_acquisition_text(&text, &path.display().to_string())
}

/// Same as [`parse_acquisition_file`] but on in-memory text; `origin` is used
/// in error messages.
pub fn parse_acquisition_text(text: &str, origin: &str) -> Result<Vec<RawAcquisition>, IngestError> {
    let mut lines = text.lines().enumerate();
    let path = origin.to_string();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((_, h)) => {
            return Err(IngestError::MalformedRow {
                path,
                line: 1,
                reason: format!("expected header '{HEADER}', found '{}'", h.trim()),
            })
        }
        None => {
            return Err(IngestError::MalformedRow {
                path,
                line: 1,
                reason: "empty file".into(),
            })
        }
    }

    let mut acqs: Vec<RawAcquisition> = Vec::new();
    let mut cur: Option<RawAcquisition> = None;

    for (idx, raw_line) in lines {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 5 {
            return Err(IngestError::MalformedRow {
                path,
                line,
                reason: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let patient_id = fields[0].trim();
        if patient_id.is_empty() {
            return Err(IngestError::MalformedRow { path, line, reason: "empty patient id".into() });
        }
        let range = MassRangeId::parse(fields[1]).ok_or_else(|| IngestError::UnknownRange {
            path: path.clone(),
            line,
            token: fields[1].trim().to_string(),
        })?;
        let acq_index: usize = fields[2].trim().parse().map_err(|_| IngestError::MalformedRow {
            path: path.clone(),
            line,
            reason: format!("bad acquisition index '{}'", fields[2].trim()),
        })?;
        let mz: f64 = fields[3].trim().parse().map_err(|_| IngestError::MalformedRow {
            path: path.clone(),
            line,
            reason: format!("bad m/z '{}'", fields[3].trim()),
        })?;
        let intensity: f64 = fields[4].trim().parse().map_err(|_| IngestError::MalformedRow {
            path: path.clone(),
            line,
            reason: format!("bad intensity '{}'", fields[4].trim()),
        })?;
        if !mz.is_finite() || !intensity.is_finite() {
            return Err(IngestError::MalformedRow {
                path,
                line,
                reason: "non-finite value".into(),
            });
        }
        if intensity < 0.0 {
            return Err(IngestError::NegativeIntensity { path, line, value: intensity });
        }
        // Instrument jitter up to +/- 0.5 outside the nominal bounds is
        // accepted; alignment snaps it back. Anything further is an error.
        let lo = range.lo() as f64 - 0.5;
        let hi = range.hi() as f64 + 0.5;
        if mz < lo || mz > hi {
            return Err(IngestError::MalformedRow {
                path,
                line,
                reason: format!("m/z {mz} outside catchment [{lo}, {hi}] of {range}"),
            });
        }

        let same_group = cur.as_ref().is_some_and(|c| {
            c.patient_id == patient_id && c.range == range && c.index == acq_index
        });
        if same_group {
            let c = cur.as_mut().unwrap();
            let prev = c.samples.last().unwrap().mz;
            if mz <= prev {
                return Err(IngestError::NonMonotonicMz { path, line, prev, cur: mz });
            }
            c.samples.push(MzSample { mz, intensity });
        } else {
            if let Some(done) = cur.take() {
                acqs.push(done);
            }
            cur = Some(RawAcquisition {
                patient_id: patient_id.to_string(),
                range,
                index: acq_index,
                samples: vec![MzSample { mz, intensity }],
            });
        }
    }
    if let Some(done) = cur.take() {
        acqs.push(done);
    }

    acqs.sort_by(|a, b| {
        (&a.patient_id, a.range, a.index).cmp(&(&b.patient_id, b.range, b.index))
    });
    validate_index_sequences(&acqs)?;
    Ok(acqs)
}

/// Acquisition indices must be exactly 0..n-1 per (patient, range); gaps or
/// duplicates hide instrument faults and are rejected.
fn validate_index_sequences(acqs: &[RawAcquisition]) -> Result<(), IngestError> {
    let mut i = 0;
    while i < acqs.len() {
        let mut j = i;
        while j < acqs.len()
            && acqs[j].patient_id == acqs[i].patient_id
            && acqs[j].range == acqs[i].range
        {
            j += 1;
        }
        let found: Vec<usize> = acqs[i..j].iter().map(|a| a.index).collect();
        if found.iter().enumerate().any(|(k, &idx)| k != idx) {
            return Err(IngestError::AcquisitionIndexGap {
                patient: acqs[i].patient_id.clone(),
                range: acqs[i].range,
                found,
            });
        }
        i = j;
    }
    Ok(())
}

/// Serializes acquisitions back into the documented CSV format.
///
/// Floats are written in shortest round-trip form, so
/// `parse(serialize(acqs)) == acqs` for any valid input.
pub fn serialize_acquisitions(acqs: &[RawAcquisition]) -> String {
    let mut out = String::with_capacity(64 + acqs.iter().map(|a| a.samples.len() * 24).sum::<usize>());
    out.push_str(HEADER);
    out.push('\n');
    for a in acqs {
        for s in &a.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                a.patient_id, a.range, a.index, s.mz, s.intensity
            ));
        }
    }
    out
}

/// Reads and validates a manifest file.
pub fn read_manifest(path: &Path) -> Result<CohortManifest, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            IngestError::MissingFile(path.to_path_buf())
        } else {
            IngestError::IoFailure { path: path.to_path_buf(), source }
        }
    })?;
    let manifest: CohortManifest =
        serde_json::from_str(&text).map_err(|e| IngestError::BadManifest(e.to_string()))?;
    if manifest.format_version != MANIFEST_VERSION {
        return Err(IngestError::VersionMismatch {
            found: manifest.format_version,
            expected: MANIFEST_VERSION,
        });
    }
    Ok(manifest)
}

/// Writes a manifest as pretty JSON.
pub fn write_manifest(manifest: &CohortManifest, path: &Path) -> Result<(), IngestError> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    let mut f = fs::File::create(path)
        .map_err(|source| IngestError::IoFailure { path: path.to_path_buf(), source })?;
    f.write_all(text.as_bytes())
        .map_err(|source| IngestError::IoFailure { path: path.to_path_buf(), source })?;
    Ok(())
}

/// Loads a full cohort from a manifest. File paths are resolved relative to
/// `base_dir`. Returns one `PatientRecord` per manifest entry, status `Ok`.
pub fn load_cohort(manifest: &CohortManifest, base_dir: &Path) -> Result<Cohort, IngestError> {
    let mut seen = BTreeSet::new();
    for entry in &manifest.patients {
        if !seen.insert(entry.id.clone()) {
            return Err(IngestError::DuplicatePatient(entry.id.clone()));
        }
    }

    let mut patients = Vec::with_capacity(manifest.patients.len());
    for entry in &manifest.patients {
        let mut record = PatientRecord::new(entry.id.clone(), entry.label);
        for file in &entry.files {
            let path = base_dir.join(file);
            if !path.exists() {
                return Err(IngestError::MissingFile(path));
            }
            let acqs = parse_acquisition_file(&path)?;
            for acq in acqs {
                if acq.patient_id != entry.id {
                    return Err(IngestError::MalformedRow {
                        path: path.display().to_string(),
                        line: 0,
                        reason: format!(
                            "file listed for patient '{}' contains rows for '{}'",
                            entry.id, acq.patient_id
                        ),
                    });
                }
                record.acquisitions[acq.range.index()].push(acq);
            }
        }
        for list in &mut record.acquisitions {
            list.sort_by_key(|a| a.index);
        }
        patients.push(record);
    }
    Ok(Cohort { patients })
}
