//! Per-region time-series cleanup: Hampel outlier replacement followed by
//! a centered moving average.
//!
//! Series may have gaps where landmarks were absent. Windows never reach
//! across a gap: a gap is any step longer than 1.5x the median sampling
//! interval, and each contiguous run is filtered on its own.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::median;

/// Gaussian consistency constant for the MAD.
pub const MAD_SCALE: f64 = 1.4826;
/// Floor on the MAD, in series units, so flat windows still have a finite
/// rejection band.
pub const MAD_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    samples: Vec<(u64, f64)>,
}

impl TimeSeries {
    pub fn new(samples: Vec<(u64, f64)>) -> Result<Self> {
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::NonIncreasingTimestamps);
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(u64, f64)] {
        &self.samples
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn timestamps(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn with_values(&self, values: Vec<f64>) -> TimeSeries {
        TimeSeries { samples: self.samples.iter().zip(values).map(|(&(t, _), v)| (t, v)).collect() }
    }

    /// Index ranges of contiguous runs.
    pub fn segments(&self) -> Vec<core::ops::Range<usize>> {
        let n = self.samples.len();
        if n == 0 {
            return Vec::new();
        }
        let steps: Vec<f64> = self.samples.windows(2).map(|w| (w[1].0 - w[0].0) as f64).collect();
        if steps.is_empty() {
            return alloc::vec![0..n];
        }
        let nominal = median(&steps);
        let mut out = Vec::new();
        let mut start = 0;
        for (i, &s) in steps.iter().enumerate() {
            if s > 1.5 * nominal {
                out.push(start..i + 1);
                start = i + 1;
            }
        }
        out.push(start..n);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditioningReport {
    pub n_outliers_removed: usize,
    /// Sorted.
    pub outlier_indices: Vec<usize>,
    pub window: usize,
}

/// Hampel identifier over a centered window (shrunk at run edges).
/// A sample is flagged when `|x - m| > k * 1.4826 * max(MAD, 0.01)` and
/// replaced by the window median `m`. Returns the filtered series and the
/// outlier mask.
pub fn hampel_filter(s: &TimeSeries, window: usize, k: f64) -> Result<(TimeSeries, Vec<bool>)> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter("Hampel window must be odd and at least 3"));
    }
    if !(k > 0.0) {
        return Err(Error::InvalidParameter("Hampel k must be positive"));
    }
    let values = s.values();
    let mut out = values.clone();
    let mut mask = alloc::vec![false; values.len()];
    if values.len() < 3 {
        return Ok((s.clone(), mask));
    }
    let half = window / 2;
    for seg in s.segments() {
        for i in seg.clone() {
            let lo = i.saturating_sub(half).max(seg.start);
            let hi = (i + half + 1).min(seg.end);
            let win = &values[lo..hi];
            let m = median(win);
            let deviations: Vec<f64> = win.iter().map(|v| (v - m).abs()).collect();
            let mad = median(&deviations);
            if (values[i] - m).abs() > k * MAD_SCALE * mad.max(MAD_FLOOR) {
                out[i] = m;
                mask[i] = true;
            }
        }
    }
    Ok((s.with_values(out), mask))
}

/// Centered moving average over the samples available within the window,
/// shrinking at run edges. Timestamps are unchanged.
pub fn moving_average(s: &TimeSeries, window: usize) -> Result<TimeSeries> {
    if window == 0 {
        return Err(Error::InvalidParameter("moving-average window must be at least 1"));
    }
    let values = s.values();
    let (left, right) = ((window - 1) / 2, window / 2);
    let mut out = values.clone();
    for seg in s.segments() {
        for (i, o) in out.iter_mut().enumerate().take(seg.end).skip(seg.start) {
            let lo = i.saturating_sub(left).max(seg.start);
            let hi = (i + right + 1).min(seg.end);
            *o = values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        }
    }
    Ok(s.with_values(out))
}

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_HAMPEL_K: f64 = 3.0;

/// Hampel (window 5, k = 3) then a 5-point moving average.
pub fn condition_series(s: &TimeSeries) -> (TimeSeries, ConditioningReport) {
    let (cleaned, mask) = hampel_filter(s, DEFAULT_WINDOW, DEFAULT_HAMPEL_K).expect("default parameters are valid");
    let smoothed = moving_average(&cleaned, DEFAULT_WINDOW).expect("default window is valid");
    let outlier_indices: Vec<usize> = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
    let report = ConditioningReport { n_outliers_removed: outlier_indices.len(), outlier_indices, window: DEFAULT_WINDOW };
    (smoothed, report)
}
