//! Feature matrices with provenance metadata, and their versioned on-disk
//! container.
//!
//! Every row remembers which patient it came from (`origin`) and, for
//! augmented rows, which acquisition combination produced it. Provenance is
//! what makes the leakage audit possible.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Label;
use crate::util::DenseMatrix;

/// Dataset container schema version.
pub const DATASET_VERSION: u32 = 1;

/// What the feature columns mean.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureIndex {
    /// Integer m/z positions.
    MzBins(Vec<u32>),
    /// Principal-component ids 0..n.
    Components(usize),
}

impl FeatureIndex {
    pub fn len(&self) -> usize {
        match self {
            Self::MzBins(bins) => bins.len(),
            Self::Components(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One sample row: feature values plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub origin: String,
    pub label: Label,
    /// Acquisition combination for augmented rows, encoded as letters
    /// (`AAAB` picks acquisition 1,1,1,2), absent for averaged rows.
    pub combo: Option<String>,
    pub values: Vec<f64>,
}

/// Rows of (pseudo-)patient feature vectors with provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub feature_index: FeatureIndex,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_index.len()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Dense value matrix for model fitting.
    pub fn to_dense(&self) -> DenseMatrix {
        let cols = self.n_features();
        let mut data = Vec::with_capacity(self.rows.len() * cols);
        for r in &self.rows {
            data.extend_from_slice(&r.values);
        }
        DenseMatrix { rows: self.rows.len(), cols, data }
    }
}

/// Encodes an acquisition combination as the letter scheme used for
/// pseudo-patient ids: index 0 is `A`, 1 is `B`, ... Combinations beyond 26
/// acquisitions fall back to a dotted decimal form (`0.1.2.27`), which stays
/// reversible.
pub fn encode_combo(indices: &[usize]) -> String {
    if indices.iter().all(|&i| i < 26) {
        indices.iter().map(|&i| (b'A' + i as u8) as char).collect()
    } else {
        indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Inverse of [`encode_combo`].
pub fn decode_combo(s: &str) -> Option<Vec<usize>> {
    if s.contains('.') {
        s.split('.').map(|t| t.parse().ok()).collect()
    } else {
        s.chars()
            .map(|c| c.is_ascii_uppercase().then(|| (c as u8 - b'A') as usize))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("dataset parse error: {0}")]
    Corrupt(String),
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    format_version: u32,
    matrix: FeatureMatrix,
}

/// Persists a matrix; `load_dataset(save_dataset(m)) == m` bit-exactly,
/// including provenance (floats are written in shortest round-trip form).
pub fn save_dataset(matrix: &FeatureMatrix, path: &Path) -> Result<(), DatasetError> {
    let file = DatasetFile { format_version: DATASET_VERSION, matrix: matrix.clone() };
    let text = serde_json::to_string(&file).map_err(|e| DatasetError::Corrupt(e.to_string()))?;
    fs::write(path, text)
        .map_err(|source| DatasetError::IoFailure { path: path.display().to_string(), source })
}

pub fn load_dataset(path: &Path) -> Result<FeatureMatrix, DatasetError> {
    let text = fs::read_to_string(path)
        .map_err(|source| DatasetError::IoFailure { path: path.display().to_string(), source })?;
    // peek the version before strict decoding so schema drift reports cleanly
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| DatasetError::Corrupt(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| DatasetError::Corrupt("missing format_version".into()))? as u32;
    if found != DATASET_VERSION {
        return Err(DatasetError::VersionMismatch { found, expected: DATASET_VERSION });
    }
    let file: DatasetFile =
        serde_json::from_value(value).map_err(|e| DatasetError::Corrupt(e.to_string()))?;
    Ok(file.matrix)
}
