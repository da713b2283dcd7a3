//! Feature hygiene and reduction: zero-variance pruning, Standard/Robust
//! scaling, optional SURF* selection, PCA. Stages are fitted on training rows
//! only and applied unchanged to test rows; the fitted pipeline is immutable.

pub mod pca;
pub mod scaler;
pub mod surf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::util::DenseMatrix;

pub use pca::{fit_pca, jacobi_eigh, project, PcaError, PcaModel};
pub use scaler::{apply_scaler, fit_scaler, ScalerKind, ScalerModel};
pub use surf::{fit_surf_star, SurfError, SurfStarModel};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("all features are constant over the training rows")]
    AllFeaturesConstant,
    #[error("no training rows")]
    EmptyTrain,
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Surf(#[from] SurfError),
}

/// Drops features whose variance over the training rows is exactly zero.
/// Returns the kept column indices for test-time projection.
pub fn prune_zero_variance(train: &DenseMatrix) -> Result<Vec<usize>, FeatureError> {
    if train.rows == 0 {
        return Err(FeatureError::EmptyTrain);
    }
    let first = train.row(0);
    let mut varying = vec![false; train.cols];
    for r in 1..train.rows {
        let row = train.row(r);
        for c in 0..train.cols {
            if row[c] != first[c] {
                varying[c] = true;
            }
        }
    }
    let kept: Vec<usize> = (0..train.cols).filter(|&c| varying[c]).collect();
    if kept.is_empty() {
        return Err(FeatureError::AllFeaturesConstant);
    }
    Ok(kept)
}

/// Stage toggles for the feature pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub scaler: ScalerKind,
    pub surf: bool,
    pub surf_k: usize,
    /// 0 disables PCA.
    pub pca_components: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { scaler: ScalerKind::Robust, surf: false, surf_k: 200, pca_components: 20 }
    }
}

/// A feature pipeline fitted on one training fold:
/// prune -> scale -> optional SURF* -> PCA.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub kept: Vec<usize>,
    pub scaler: ScalerModel,
    pub surf: Option<SurfStarModel>,
    pub pca: Option<PcaModel>,
}

impl FeaturePipeline {
    /// Fits every stage on the training rows and returns the pipeline plus
    /// the transformed training matrix.
    pub fn fit(
        train: &DenseMatrix,
        labels: &[crate::ingest::Label],
        config: &FeatureConfig,
    ) -> Result<(Self, DenseMatrix), FeatureError> {
        let kept = prune_zero_variance(train)?;
        let mut x = train.select_columns(&kept);

        let scaler = fit_scaler(config.scaler, &x);
        apply_scaler(&scaler, &mut x);

        let surf = if config.surf {
            let model = fit_surf_star(&x, labels, config.surf_k)?;
            x = model.apply(&x);
            Some(model)
        } else {
            None
        };

        let pca = if config.pca_components > 0 {
            let n = config.pca_components.min(x.cols).min(x.rows.saturating_sub(1)).max(1);
            let model = fit_pca(&x, n)?;
            x = project(&model, &x);
            Some(model)
        } else {
            None
        };

        Ok((Self { kept, scaler, surf, pca }, x))
    }

    /// Applies the fitted stages to new rows (training statistics only).
    pub fn transform(&self, rows: &DenseMatrix) -> DenseMatrix {
        let mut x = rows.select_columns(&self.kept);
        apply_scaler(&self.scaler, &mut x);
        if let Some(surf) = &self.surf {
            x = surf.apply(&x);
        }
        if let Some(pca) = &self.pca {
            x = project(pca, &x);
        }
        x
    }
}
