//! TIC plateau search: find the longest flat stretch of the TIC curve and the
//! four consecutive acquisitions within it that minimize the standard
//! deviation.

use serde::{Deserialize, Serialize};

use crate::util::{quantile, std_pop};

use super::{PreprocessError, TicCurve};

/// Number of acquisitions averaged into the per-patient spectrum.
pub const PLATEAU_WINDOW: usize = 4;

/// Result of the plateau search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauSelection {
    /// Longest flat interval, inclusive acquisition indices.
    pub plateau: (usize, usize),
    /// The four chosen acquisition indices (a contiguous window).
    pub chosen: [usize; PLATEAU_WINDOW],
    /// Gradient tolerance actually used.
    pub epsilon: f64,
}

/// Discrete gradient of the curve: central differences in the interior,
/// one-sided at the ends.
pub fn gradient(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    values[1] - values[0]
                } else if i == n - 1 {
                    values[n - 1] - values[n - 2]
                } else {
                    (values[i + 1] - values[i - 1]) / 2.0
                }
            })
            .collect(),
    }
}

/// Finds the plateau of maximum length and the min-std window of 4 inside it.
///
/// A point is flat when its gradient magnitude is strictly below the
/// tolerance, which is the `q`-th quantile of all gradient magnitudes; exact
/// zero gradients are always flat, so a perfectly constant curve is a plateau
/// even though its tolerance degenerates to zero. Ties between equal-length
/// runs and between equal-std windows break to the earliest.
pub fn find_plateau(tic: &TicCurve, q: f64) -> Result<PlateauSelection, PreprocessError> {
    let values = &tic.values;
    if values.len() < PLATEAU_WINDOW {
        return Err(PreprocessError::NoPlateau);
    }
    let grads = gradient(values);
    let mags: Vec<f64> = grads.iter().map(|g| g.abs()).collect();
    let epsilon = quantile(&mags, q);

    let flat: Vec<bool> = mags.iter().map(|&m| m < epsilon || m == 0.0).collect();

    // longest contiguous flat run, earliest on tie
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < flat.len() {
        if flat[i] {
            let start = i;
            while i < flat.len() && flat[i] {
                i += 1;
            }
            let run = (start, i - 1);
            let len = run.1 - run.0 + 1;
            if best.is_none_or(|b| len > b.1 - b.0 + 1) {
                best = Some(run);
            }
        } else {
            i += 1;
        }
    }
    let plateau = match best {
        Some(run) if run.1 - run.0 + 1 >= PLATEAU_WINDOW => run,
        _ => return Err(PreprocessError::NoPlateau),
    };

    // rolling window of size 4: minimize the standard deviation of TIC values
    let mut chosen_start = plateau.0;
    let mut best_std = f64::INFINITY;
    for w in plateau.0..=plateau.1 - (PLATEAU_WINDOW - 1) {
        let s = std_pop(&values[w..w + PLATEAU_WINDOW]);
        if s < best_std {
            best_std = s;
            chosen_start = w;
        }
    }
    let chosen = [chosen_start, chosen_start + 1, chosen_start + 2, chosen_start + 3];
    Ok(PlateauSelection { plateau, chosen, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tic(values: &[f64]) -> TicCurve {
        TicCurve { values: values.to_vec() }
    }

    #[test]
    fn constant_signal_is_all_plateau_first_window_chosen() {
        let sel = find_plateau(&tic(&[1.0; 6]), 0.5).unwrap();
        assert_eq!(sel.plateau, (0, 5));
        assert_eq!(sel.chosen, [0, 1, 2, 3]);
        assert_eq!(sel.epsilon, 0.0);
    }

    #[test]
    fn tail_plateau_with_min_std_window() {
        let values = [0.0, 5.0, 9.0, 10.0, 10.1, 10.05, 10.1, 10.0];
        let sel = find_plateau(&tic(&values), 0.5).unwrap();
        // brute-force oracle: gradients are [5, 4.5, 2.5, 0.55, 0.025, 0,
        // 0.025, 0.1], median 0.325, so indices 4..7 are flat.
        assert_eq!(sel.plateau, (4, 7));
        // only one window of size 4 fits, and it is the min-std one
        let mut best = (f64::INFINITY, 0);
        for w in sel.plateau.0..=sel.plateau.1 - 3 {
            let s = std_pop(&values[w..w + 4]);
            if s < best.0 {
                best = (s, w);
            }
        }
        assert_eq!(sel.chosen[0], best.1);
        assert_eq!(sel.chosen, [4, 5, 6, 7]);
    }

    #[test]
    fn strictly_increasing_has_no_plateau() {
        // all gradients equal: nothing is strictly below the tolerance
        let err = find_plateau(&tic(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]), 0.1).unwrap_err();
        assert!(matches!(err, PreprocessError::NoPlateau));
    }

    #[test]
    fn too_short_curve() {
        assert!(matches!(
            find_plateau(&tic(&[1.0, 1.0, 1.0]), 0.5),
            Err(PreprocessError::NoPlateau)
        ));
    }

    #[test]
    fn min_std_window_beats_earlier_noisier_window() {
        // flat region with a calmer stretch at the end
        let values = [100.0, 200.0, 10.0, 10.4, 9.6, 10.0, 10.01, 10.0, 10.01, 10.0];
        let sel = find_plateau(&tic(&values), 0.8).unwrap();
        assert!(sel.plateau.1 - sel.plateau.0 + 1 >= 4);
        // brute force over every window inside the plateau
        let mut best = (f64::INFINITY, usize::MAX);
        for w in sel.plateau.0..=sel.plateau.1 - 3 {
            let s = std_pop(&values[w..w + 4]);
            if s < best.0 {
                best = (s, w);
            }
        }
        assert_eq!(sel.chosen[0], best.1);
    }

    #[test]
    fn gradient_definition() {
        let g = gradient(&[0.0, 1.0, 4.0, 9.0]);
        assert_eq!(g, vec![1.0, 2.0, 4.0, 5.0]);
    }
}
