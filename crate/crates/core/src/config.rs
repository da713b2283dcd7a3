//! Run configuration: every pipeline toggle and hyperparameter, parseable
//! from a `key=value` file with command-line overrides. The resolved
//! configuration is embedded verbatim in every report so a run can be
//! reproduced from its output alone.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{AcquisitionMode, DEFAULT_COMBO_CAP};
use crate::features::{FeatureConfig, ScalerKind};
use crate::models::{Hyperparams, ModelKind};
use crate::preprocess::{FilterParams, Scope};

/// A model selected for evaluation: one base family or the soft-voting
/// ensemble of all five.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelChoice {
    Base(ModelKind),
    Ensemble,
}

impl ModelChoice {
    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "ensemble" | "ens" | "ens." => Some(Self::Ensemble),
            other => ModelKind::parse(other).map(Self::Base),
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Base(kind) => kind.display_name(),
            Self::Ensemble => "Ens.",
        }
    }
}

pub const ALL_MODELS: [ModelChoice; 6] = [
    ModelChoice::Base(ModelKind::Knn),
    ModelChoice::Base(ModelKind::RandomForest),
    ModelChoice::Base(ModelKind::LogisticRegression),
    ModelChoice::Base(ModelKind::GradientBoosting),
    ModelChoice::Base(ModelKind::SvmRbf),
    ModelChoice::Ensemble,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub folds: usize,
    pub scope: Scope,
    pub mode: AcquisitionMode,
    pub oversample: bool,
    pub augment_cap: usize,
    pub models: Vec<ModelChoice>,
    pub filter: FilterParams,
    pub features: FeatureConfig,
    pub hyper: Hyperparams,
    /// Also report per-pseudo-patient (row-level) test metrics.
    pub diagnostics: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            folds: 10,
            scope: Scope::Whole,
            mode: AcquisitionMode::MultipleAugmented,
            oversample: true,
            augment_cap: DEFAULT_COMBO_CAP,
            models: ALL_MODELS.to_vec(),
            filter: FilterParams::default(),
            features: FeatureConfig::default(),
            hyper: Hyperparams::default(),
            diagnostics: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("bad value '{value}' for key '{key}': {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("malformed line {line}: expected key=value")]
    MalformedLine { line: usize },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunConfig {
    /// Reads a `key=value` file; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        config.apply_file(path)?;
        Ok(config)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or(ConfigError::MalformedLine { line: i + 1 })?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies one override; keys mirror the config-file grammar.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn bad(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
            ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            }
        }
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            value.parse().map_err(|e| bad(key, value, e))
        }
        fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
            match value.to_ascii_lowercase().as_str() {
                "on" | "true" | "yes" | "1" => Ok(true),
                "off" | "false" | "no" | "0" => Ok(false),
                _ => Err(bad(key, value, "expected on/off")),
            }
        }

        match key {
            "seed" => self.seed = num(key, value)?,
            "folds" => self.folds = num(key, value)?,
            "range" => {
                self.scope =
                    Scope::parse(value).ok_or_else(|| bad(key, value, "expected whole or r1..r4"))?
            }
            "mode" => {
                self.mode = AcquisitionMode::parse(value)
                    .ok_or_else(|| bad(key, value, "expected single or multiple"))?
            }
            "oversample" => self.oversample = flag(key, value)?,
            "augment.cap" => self.augment_cap = num(key, value)?,
            "diagnostics" => self.diagnostics = flag(key, value)?,
            "models" => {
                let mut models = Vec::new();
                for token in value.split(',') {
                    models.push(
                        ModelChoice::parse(token).ok_or_else(|| bad(key, token, "unknown model"))?,
                    );
                }
                if models.is_empty() {
                    return Err(bad(key, value, "empty model list"));
                }
                self.models = models;
            }
            "filter" => self.filter.filter_enabled = flag(key, value)?,
            "sg.window" => self.filter.sg_window = num(key, value)?,
            "sg.polyorder" => self.filter.sg_polyorder = num(key, value)?,
            "sg.deriv" => self.filter.sg_deriv = num(key, value)?,
            "sg.baseline_window" => self.filter.baseline_window = num(key, value)?,
            "hp1" => self.filter.hp1 = num(key, value)?,
            "hp2" => self.filter.hp2 = num(key, value)?,
            "plateau_q" => self.filter.plateau_q = num(key, value)?,
            "z_thresh" => self.filter.z_thresh = num(key, value)?,
            "scaler" => {
                self.features.scaler = ScalerKind::parse(value)
                    .ok_or_else(|| bad(key, value, "expected none, standard or robust"))?
            }
            "surf" => self.features.surf = flag(key, value)?,
            "surf.k" => self.features.surf_k = num(key, value)?,
            "pca_components" => self.features.pca_components = num(key, value)?,
            "knn.k" => self.hyper.knn_k = num(key, value)?,
            "rf.trees" => self.hyper.rf_trees = num(key, value)?,
            "rf.max_depth" => self.hyper.rf_max_depth = num(key, value)?,
            "rf.min_leaf" => self.hyper.rf_min_leaf = num(key, value)?,
            "gb.rounds" => self.hyper.gb_rounds = num(key, value)?,
            "gb.depth" => self.hyper.gb_depth = num(key, value)?,
            "gb.shrinkage" => self.hyper.gb_shrinkage = num(key, value)?,
            "gb.lambda" => self.hyper.gb_lambda = num(key, value)?,
            "svm.c" => self.hyper.svm_c = num(key, value)?,
            "svm.gamma" => {
                self.hyper.svm_gamma = if value.eq_ignore_ascii_case("scale") {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "svm.tol" => self.hyper.svm_tol = num(key, value)?,
            "svm.max_train" => self.hyper.svm_max_train = num(key, value)?,
            "lr.l2" => self.hyper.lr_l2 = num(key, value)?,
            "lr.tol" => self.hyper.lr_tol = num(key, value)?,
            "lr.max_iter" => self.hyper.lr_max_iter = num(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Base model kinds that must be fitted to serve `models`.
    pub fn required_kinds(&self) -> Vec<ModelKind> {
        let wants_ensemble = self.models.contains(&ModelChoice::Ensemble);
        ModelKind::ALL
            .into_iter()
            .filter(|&kind| wants_ensemble || self.models.contains(&ModelChoice::Base(kind)))
            .collect()
    }
}
