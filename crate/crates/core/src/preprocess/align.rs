//! Peak alignment: snapping detected peaks to integer m/z anchors and
//! resampling the segments between them onto the integer grid.

use crate::ingest::{MzSample, RawAcquisition};

use super::{AlignedSpectrum, PreprocessError, SpectrumRange};

/// Relative noise floor for peak detection: a local maximum only counts as a
/// peak if its share of the total signal exceeds this value (the equivalent of
/// the 1e-4 high-pass threshold applied after TIC normalization).
pub const PEAK_FLOOR: f64 = 1e-4;

/// Detects peaks as strict local maxima above the noise floor; a run of equal
/// values that rises before and falls after counts once, at its leftmost
/// index. Endpoints never qualify.
pub fn detect_peaks(samples: &[MzSample]) -> Vec<usize> {
    let n = samples.len();
    if n < 3 {
        return Vec::new();
    }
    let total: f64 = samples.iter().map(|s| s.intensity).sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let floor = PEAK_FLOOR * total;

    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        let y = samples[i].intensity;
        if y > samples[i - 1].intensity && y > floor {
            // extend over a flat top
            let mut j = i;
            while j + 1 < n && samples[j + 1].intensity == y {
                j += 1;
            }
            if j < n - 1 && samples[j + 1].intensity < y {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Aligns a raw acquisition onto the integer m/z grid of its mass range.
///
/// Detected peaks are anchored at their nearest integer position; segments
/// between consecutive anchors are stretched or compressed by linear
/// interpolation so that endpoints land on the anchors. Input already sampled
/// on the integer grid comes back unchanged on grid values.
pub fn align_peaks(raw: &RawAcquisition) -> Result<AlignedSpectrum, PreprocessError> {
    if raw.samples.is_empty() {
        return Err(PreprocessError::EmptySamples);
    }
    let range = SpectrumRange::Single(raw.range);
    let lo = range.lo() as f64;
    let hi = range.hi() as f64;
    let n_bins = range.len();
    let samples = &raw.samples;

    if samples.len() == 1 {
        // degenerate sweep: place the lone sample at its nearest bin
        let mut values = vec![0.0; n_bins];
        let bin = samples[0].mz.round().clamp(lo, hi) as usize - range.lo() as usize;
        values[bin] = samples[0].intensity;
        return Ok(AlignedSpectrum { range, values });
    }

    // Control points (source m/z -> target m/z), strictly increasing in both
    // coordinates. Peaks become anchors at their nearest integer; when two
    // peaks round to the same integer the more intense wins (leftmost on tie).
    let mut ctrl: Vec<(f64, f64, f64)> = vec![(samples[0].mz, lo, f64::NEG_INFINITY)];
    for &p in &detect_peaks(samples) {
        let src = samples[p].mz;
        let target = src.round().clamp(lo, hi);
        let intensity = samples[p].intensity;
        let last = ctrl.last_mut().unwrap();
        if target > last.1 {
            ctrl.push((src, target, intensity));
        } else if target == last.1 && intensity > last.2 {
            *last = (src, target, intensity);
        }
        // peaks whose bin is already claimed by a stronger anchor are dropped
    }
    let last_src = samples[samples.len() - 1].mz;
    if ctrl.last().is_some_and(|&(s, t, _)| t < hi && s < last_src) {
        ctrl.push((last_src, hi, f64::NEG_INFINITY));
    }

    // Resample: for each integer bin, invert the piecewise-linear target map
    // to a source coordinate, then linearly interpolate the raw signal there.
    // Anchored bins read their source coordinate exactly, so peak apexes keep
    // their intensity bit-for-bit.
    let mut values = vec![0.0; n_bins];
    let mut seg = 0;
    for (k, value) in values.iter_mut().enumerate() {
        let g = lo + k as f64;
        if g < ctrl[0].1 || g > ctrl[ctrl.len() - 1].1 {
            continue; // outside the mapped span
        }
        while seg + 2 < ctrl.len() && ctrl[seg + 1].1 < g {
            seg += 1;
        }
        let (s0, t0, _) = ctrl[seg];
        let (s1, t1, _) = ctrl[seg + 1];
        let src = if g == t0 {
            s0
        } else if g == t1 {
            s1
        } else if t1 > t0 {
            s0 + (g - t0) * (s1 - s0) / (t1 - t0)
        } else {
            s0
        };
        *value = interpolate(samples, src);
    }

    Ok(AlignedSpectrum { range, values })
}

/// Linear interpolation of the raw samples at source coordinate `x`,
/// clamped to the sampled span.
fn interpolate(samples: &[MzSample], x: f64) -> f64 {
    let n = samples.len();
    if x <= samples[0].mz {
        return samples[0].intensity;
    }
    if x >= samples[n - 1].mz {
        return samples[n - 1].intensity;
    }
    // binary search for the bracketing pair
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if samples[mid].mz <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = samples[lo];
    let b = samples[hi];
    let t = (x - a.mz) / (b.mz - a.mz);
    a.intensity + t * (b.intensity - a.intensity)
}
