//! Per-feature scaling: Standard (mean/std) and Robust (median/IQR).

use serde::{Deserialize, Serialize};

use crate::util::{mean, quantile, std_pop, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalerKind {
    /// No scaling at all.
    None,
    /// Subtract the mean, divide by the standard deviation.
    Standard,
    /// Subtract the median, divide by the interquartile range; outliers barely
    /// move the statistics.
    Robust,
}

impl ScalerKind {
    pub fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "none" | "off" => Some(Self::None),
            "standard" | "ss" => Some(Self::Standard),
            "robust" | "rs" => Some(Self::Robust),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Standard => "standard",
            Self::Robust => "robust",
        }
    }
}

/// Fitted per-feature location/scale transform.
///
/// Features whose scale statistic degenerates to zero are passed through
/// unchanged (flagged in `constant`): dividing by zero would be worse than
/// leaving a nearly-constant feature alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerModel {
    pub kind: ScalerKind,
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    pub constant: Vec<bool>,
}

/// Fits the scaler on training rows only.
pub fn fit_scaler(kind: ScalerKind, train: &DenseMatrix) -> ScalerModel {
    let cols = train.cols;
    let mut location = vec![0.0; cols];
    let mut scale = vec![1.0; cols];
    let mut constant = vec![false; cols];
    if kind == ScalerKind::None {
        return ScalerModel { kind, location, scale, constant };
    }
    let mut degenerate = 0usize;
    for c in 0..cols {
        let col: Vec<f64> = (0..train.rows).map(|r| train.row(r)[c]).collect();
        let (loc, sc) = match kind {
            ScalerKind::Standard => (mean(&col), std_pop(&col)),
            ScalerKind::Robust => {
                let mut sorted = col.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite feature"));
                let median = crate::util::quantile_sorted(&sorted, 0.5);
                let iqr = crate::util::quantile_sorted(&sorted, 0.75)
                    - crate::util::quantile_sorted(&sorted, 0.25);
                (median, iqr)
            }
            ScalerKind::None => unreachable!(),
        };
        if sc > 0.0 {
            location[c] = loc;
            scale[c] = sc;
        } else {
            constant[c] = true;
            degenerate += 1;
        }
    }
    if degenerate > 0 {
        log::warn!("{degenerate} feature(s) with degenerate scale passed through unscaled");
    }
    ScalerModel { kind, location, scale, constant }
}

/// Applies training statistics to any rows (training or test).
pub fn apply_scaler(model: &ScalerModel, rows: &mut DenseMatrix) {
    if model.kind == ScalerKind::None {
        return;
    }
    assert_eq!(rows.cols, model.location.len(), "scaler width mismatch");
    for r in 0..rows.rows {
        let row = rows.row_mut(r);
        for c in 0..row.len() {
            if !model.constant[c] {
                row[c] = (row[c] - model.location[c]) / model.scale[c];
            }
        }
    }
}

/// Convenience used in tests and small pipelines.
pub fn quantile_of(values: &[f64], q: f64) -> f64 {
    quantile(values, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_rows(rows)
    }

    #[test]
    fn standard_scaler_two_points() {
        let train = matrix(&[vec![0.0], vec![2.0]]);
        let model = fit_scaler(ScalerKind::Standard, &train);
        assert_eq!(model.location, vec![1.0]);
        assert_eq!(model.scale, vec![1.0]);
        let mut rows = train.clone();
        apply_scaler(&model, &mut rows);
        assert_eq!(rows.data, vec![-1.0, 1.0]);
    }

    #[test]
    fn robust_scaler_shrugs_at_outliers() {
        let col = vec![1.0, 2.0, 3.0, 4.0, 100.0];
        let train = matrix(&col.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        let robust = fit_scaler(ScalerKind::Robust, &train);
        assert_eq!(robust.location, vec![3.0]); // median
        assert_eq!(robust.scale, vec![2.0]); // Q3 - Q1 = 4 - 2
        let standard = fit_scaler(ScalerKind::Standard, &train);
        // the outlier drags the mean from the bulk (2.5-ish) to 22, but the
        // median not at all; same story for the scale statistic
        let clean_center = 3.0;
        assert!((robust.location[0] - clean_center).abs() < (standard.location[0] - clean_center).abs());
        assert!(standard.scale[0] > 10.0 * robust.scale[0]);
    }

    #[test]
    fn transformed_training_columns_are_centered() {
        let rows: Vec<Vec<f64>> =
            (0..40).map(|i| vec![i as f64 * 0.7 - 3.0, (i % 7) as f64, 42.0 + (i % 3) as f64]).collect();
        let train = matrix(&rows);

        let mut ss = train.clone();
        apply_scaler(&fit_scaler(ScalerKind::Standard, &train), &mut ss);
        for c in 0..3 {
            let col: Vec<f64> = (0..ss.rows).map(|r| ss.row(r)[c]).collect();
            assert!(mean(&col).abs() < 1e-9, "mean of col {c}");
            assert!((std_pop(&col) - 1.0).abs() < 1e-9, "std of col {c}");
        }

        let mut rs = train.clone();
        apply_scaler(&fit_scaler(ScalerKind::Robust, &train), &mut rs);
        for c in 0..3 {
            let mut col: Vec<f64> = (0..rs.rows).map(|r| rs.row(r)[c]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(crate::util::quantile_sorted(&col, 0.5).abs() < 1e-9, "median of col {c}");
        }
    }

    #[test]
    fn degenerate_feature_passes_through() {
        let train = matrix(&[vec![5.0, 1.0], vec![5.0, 3.0], vec![5.0, 2.0]]);
        let model = fit_scaler(ScalerKind::Standard, &train);
        assert!(model.constant[0]);
        assert!(!model.constant[1]);
        let mut rows = matrix(&[vec![5.0, 2.0]]);
        apply_scaler(&model, &mut rows);
        assert_eq!(rows.row(0)[0], 5.0);
    }

    #[test]
    fn applying_twice_is_not_idempotent() {
        let train = matrix(&[vec![0.0], vec![1.0], vec![5.0]]);
        let model = fit_scaler(ScalerKind::Standard, &train);
        let mut once = train.clone();
        apply_scaler(&model, &mut once);
        let mut twice = once.clone();
        apply_scaler(&model, &mut twice);
        assert_ne!(once.data, twice.data);
    }
}
