use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::nearest_index;

pub const DEFAULT_ALIGN_TOLERANCE_MS: u64 = 30_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedSample {
    pub timestamp_ms: u64,
    pub camera_c: f64,
    pub reference_c: f64,
    pub percent_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceReport {
    pub samples: Vec<AlignedSample>,
    pub mean_percent_error: f64,
    pub max_percent_error: f64,
    pub max_abs_error_c: f64,
}

/// Pairs each reference sample with the nearest camera sample within
/// `tolerance_ms` and reports `|cam - ref| / ref * 100`.
pub fn compare_reference(camera: &[(u64, f64)], reference: &[(u64, f64)], tolerance_ms: u64) -> Result<ReferenceReport> {
    if camera.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::NonIncreasingTimestamps);
    }
    let times: Vec<u64> = camera.iter().map(|s| s.0).collect();
    let mut samples = Vec::new();
    for &(t, r) in reference {
        let Some(i) = nearest_index(&times, t) else { continue };
        if times[i].abs_diff(t) > tolerance_ms || r == 0.0 {
            continue;
        }
        let cam = camera[i].1;
        samples.push(AlignedSample { timestamp_ms: t, camera_c: cam, reference_c: r, percent_error: (cam - r).abs() / r.abs() * 100.0 });
    }
    if samples.is_empty() {
        return Err(Error::NoAlignedPairs);
    }
    let mean_percent_error = samples.iter().map(|s| s.percent_error).sum::<f64>() / samples.len() as f64;
    let max_percent_error = samples.iter().map(|s| s.percent_error).fold(0.0, f64::max);
    let max_abs_error_c = samples.iter().map(|s| (s.camera_c - s.reference_c).abs()).fold(0.0, f64::max);
    Ok(ReferenceReport { samples, mean_percent_error, max_percent_error, max_abs_error_c })
}
