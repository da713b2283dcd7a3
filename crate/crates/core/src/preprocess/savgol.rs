//! Savitzky-Golay smoothing and differentiation filter.
//!
//! The filter convolves the signal with the least-squares kernel of a local
//! polynomial fit. Boundaries are handled by refitting the polynomial on the
//! truncated asymmetric window instead of padding, so short-range edges are
//! not contaminated by artificial zeros.

use thiserror::Error;

use crate::util::solve_linear;

#[derive(Debug, Error, PartialEq)]
pub enum SavGolError {
    #[error("window {window} larger than signal length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Central Savitzky-Golay kernel for a full symmetric window.
///
/// `window` must be odd, `polyorder < window`, `deriv <= polyorder`. The
/// returned weights satisfy `sum(w) == 1` for `deriv == 0` and `sum(w) == 0`
/// for `deriv >= 1`.
pub fn savgol_kernel(window: usize, polyorder: usize, deriv: usize) -> Result<Vec<f64>, SavGolError> {
    validate(window, polyorder, deriv)?;
    let half = (window / 2) as isize;
    let offsets: Vec<f64> = (-half..=half).map(|o| o as f64).collect();
    Ok(fit_weights(&offsets, polyorder, deriv))
}

/// Applies the filter with truncated-window boundary refitting.
pub fn savgol_filter(
    signal: &[f64],
    window: usize,
    polyorder: usize,
    deriv: usize,
) -> Result<Vec<f64>, SavGolError> {
    validate(window, polyorder, deriv)?;
    let n = signal.len();
    if window > n {
        return Err(SavGolError::WindowTooLarge { window, len: n });
    }
    let half = window / 2;
    let kernel = savgol_kernel(window, polyorder, deriv)?;
    let mut out = vec![0.0; n];

    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        if hi - lo + 1 == window {
            // interior: precomputed symmetric kernel
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += w * signal[lo + k];
            }
            out[i] = acc;
        } else {
            // edge: refit on the truncated window
            let len = hi - lo + 1;
            let order = polyorder.min(len - 1);
            if deriv > order {
                out[i] = 0.0;
                continue;
            }
            let offsets: Vec<f64> = (lo..=hi).map(|j| j as f64 - i as f64).collect();
            let w = fit_weights(&offsets, order, deriv);
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                acc += wk * signal[lo + k];
            }
            out[i] = acc;
        }
    }
    Ok(out)
}

fn validate(window: usize, polyorder: usize, deriv: usize) -> Result<(), SavGolError> {
    if window < 3 || window % 2 == 0 {
        return Err(SavGolError::InvalidParams(format!("window {window} must be odd and >= 3")));
    }
    if polyorder >= window {
        return Err(SavGolError::InvalidParams(format!(
            "polyorder {polyorder} must be < window {window}"
        )));
    }
    if deriv > polyorder {
        return Err(SavGolError::InvalidParams(format!(
            "deriv {deriv} must be <= polyorder {polyorder}"
        )));
    }
    Ok(())
}

/// Least-squares weights for evaluating the `deriv`-th derivative of the
/// fitted polynomial at offset 0.
///
/// Offsets are rescaled to [-1, 1] before solving the normal equations, which
/// keeps the system well conditioned even for wide windows; the derivative is
/// rescaled back afterwards.
fn fit_weights(offsets: &[f64], polyorder: usize, deriv: usize) -> Vec<f64> {
    let m = offsets.len();
    let p = polyorder + 1;
    let scale = offsets.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);

    // design matrix on scaled offsets
    let mut design = vec![0.0; m * p];
    for (r, &x) in offsets.iter().enumerate() {
        let xs = x / scale;
        let mut pow = 1.0;
        for c in 0..p {
            design[r * p + c] = pow;
            pow *= xs;
        }
    }
    // normal matrix A^T A and target column e_deriv
    let mut ata = vec![0.0; p * p];
    for r in 0..m {
        for i in 0..p {
            for j in 0..p {
                ata[i * p + j] += design[r * p + i] * design[r * p + j];
            }
        }
    }
    let mut rhs = vec![0.0; p];
    rhs[deriv] = 1.0;
    let z = solve_linear(&mut ata, &mut rhs, p);

    // weights w = A z, rescaled: d-th derivative at 0 is d! * a_d / scale^d
    let mut factorial = 1.0;
    for k in 1..=deriv {
        factorial *= k as f64;
    }
    let rescale = factorial / scale.powi(deriv as i32);
    (0..m)
        .map(|r| {
            let mut acc = 0.0;
            for c in 0..p {
                acc += design[r * p + c] * z[c];
            }
            acc * rescale
        })
        .collect()
}
