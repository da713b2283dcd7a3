//! Breath-sample mass-spectrometry pipeline: acquisition ingestion, spectral
//! preprocessing, combinatorial augmentation, feature engineering, classical
//! classifiers with a soft-voting ensemble, and patient-grouped cross-validated
//! evaluation.
//!
//! The crate is organized to follow the data flow:
//!
//! 1. [`ingest`] parses acquisition files and cohort manifests.
//! 2. [`preprocess`] turns raw acquisitions into clean, normalized spectra
//!    (peak alignment, TIC plateau selection, Savitzky-Golay filtering).
//! 3. [`augment`] builds training matrices, either one averaged spectrum per
//!    patient or the cartesian product of per-range acquisitions.
//! 4. [`features`] handles pruning, scaling, SURF* selection and PCA.
//! 5. [`models`] provides the five base classifiers and the soft-voting
//!    ensemble, plus minority oversampling.
//! 6. [`eval`] runs patient-grouped stratified cross-validation and computes
//!    the report metrics.
//! 7. [`synth`] generates deterministic synthetic cohorts with ground truth,
//!    used as the end-to-end oracle.
//!
//! All operations are pure functions over immutable inputs; runs are fully
//! deterministic given the configured seed.

pub mod augment;
pub mod config;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod models;
pub mod preprocess;
pub mod synth;
pub mod util;

pub use config::RunConfig;
pub use dataset::{FeatureMatrix, FeatureRow};
pub use ingest::{CohortManifest, Label, MassRangeId, PatientRecord, RawAcquisition};
pub use preprocess::{AlignedSpectrum, FilterParams, SpectrumRange};
