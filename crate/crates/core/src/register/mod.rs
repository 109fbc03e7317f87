//! Per-frame cross-modal registration.
//!
//! The visual frame is converted to gray and area-downscaled to the
//! thermal resolution, both images are masked, ORB features are matched,
//! and a RANSAC homography is fitted at thermal resolution. That map is
//! composed with the downscale so the result takes full-resolution visual
//! pixels to thermal pixels. When too few inliers survive, the rig prior
//! is returned instead.

pub mod mask;
pub mod matching;
pub mod orb;

use alloc::vec::Vec;

use crate::calib::{ransac_homography, Correspondence, Homography, RansacParams, RigCalibration};
use crate::error::{Error, Result};
use crate::frame::{downscale_area, to_grayscale, GrayFrame, VisualFrame};
use crate::math::Point2;

pub use mask::{make_mask, otsu_threshold, MaskFrame};
pub use matching::match_descriptors;
pub use orb::{detect_features, Descriptor, Feature, Keypoint, OrbParams, TestPattern};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationParams {
    pub orb: OrbParams,
    pub ratio: f64,
    pub ransac: RansacParams,
    pub min_inliers: usize,
}

impl RegistrationParams {
    pub fn with_seed(seed: u64) -> Self {
        Self { orb: OrbParams::default(), ratio: 0.8, ransac: RansacParams::with_seed(seed), min_inliers: 15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationResult {
    /// Visual (full resolution) to thermal.
    pub homography: Homography,
    pub n_matches: usize,
    pub n_inliers: usize,
    pub used_fallback: bool,
    /// Mean symmetric error of the inliers in thermal pixels; 0 when the
    /// prior was used.
    pub mean_reproj_px: f64,
}

/// One side of a registration, ready for matching. Preparing the visual
/// side once lets a static camera view be reused across many frames.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub gray: GrayFrame,
    pub mask: MaskFrame,
    pub features: Vec<Feature>,
}

impl PreparedImage {
    pub fn new(gray: GrayFrame, params: &OrbParams, pattern: &TestPattern) -> Self {
        let mask = make_mask(&gray);
        let features = detect_features(&gray, &mask, params, pattern);
        Self { gray, mask, features }
    }
}

/// Gray, downscaled visual side. `factor` is the visual/thermal width
/// ratio.
pub fn prepare_visual(v: &VisualFrame, factor: u32, params: &OrbParams, pattern: &TestPattern) -> Result<PreparedImage> {
    let low = downscale_area(&to_grayscale(v), factor)?;
    Ok(PreparedImage::new(low, params, pattern))
}

/// Integer downscale factor between a visual and a thermal frame.
pub fn downscale_factor(visual_w: u32, visual_h: u32, thermal_w: u32, thermal_h: u32) -> Result<u32> {
    if thermal_w == 0 || !visual_w.is_multiple_of(thermal_w) {
        return Err(Error::InvalidParameter("visual width must be a multiple of thermal width"));
    }
    let f = visual_w / thermal_w;
    if f == 0 || visual_h != thermal_h * f {
        return Err(Error::InvalidParameter("visual and thermal aspect ratios differ"));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SameScaleFit {
    pub homography: Option<Homography>,
    pub n_matches: usize,
    pub n_inliers: usize,
    pub mean_error: f64,
}

/// Matches two prepared images of equal resolution and fits `b ~ H a`.
pub fn register_prepared(a: &PreparedImage, b: &PreparedImage, params: &RegistrationParams) -> SameScaleFit {
    let da: Vec<Descriptor> = a.features.iter().map(|f| f.descriptor).collect();
    let db: Vec<Descriptor> = b.features.iter().map(|f| f.descriptor).collect();
    let matches = match_descriptors(&da, &db, params.ratio);
    let corrs: Vec<Correspondence> = matches
        .iter()
        .map(|&(i, j)| {
            let (p, q) = (a.features[i].keypoint, b.features[j].keypoint);
            Correspondence { src: Point2::new(p.x, p.y), dst: Point2::new(q.x, q.y) }
        })
        .collect();
    match ransac_homography(&corrs, &params.ransac) {
        Ok(fit) => SameScaleFit {
            n_matches: corrs.len(),
            n_inliers: fit.n_inliers(),
            mean_error: fit.mean_error,
            homography: Some(fit.homography),
        },
        Err(_) => SameScaleFit { homography: None, n_matches: corrs.len(), n_inliers: 0, mean_error: 0.0 },
    }
}

/// Registers two gray frames of the same resolution.
pub fn register_gray(a: &GrayFrame, b: &GrayFrame, params: &RegistrationParams) -> SameScaleFit {
    let pattern = TestPattern::standard();
    let pa = PreparedImage::new(a.clone(), &params.orb, &pattern);
    let pb = PreparedImage::new(b.clone(), &params.orb, &pattern);
    register_prepared(&pa, &pb, params)
}

/// Full registration of a prepared (downscaled) visual side against an
/// 8-bit thermal rendering.
pub fn register_with_prior(
    visual: &PreparedImage,
    factor: u32,
    thermal: &PreparedImage,
    prior: Option<&RigCalibration>,
    params: &RegistrationParams,
) -> Result<RegistrationResult> {
    let fit = register_prepared(visual, thermal, params);
    let estimated = match fit.homography {
        Some(h) if fit.n_inliers >= params.min_inliers => Some(h.compose(&Homography::scale(1.0 / factor as f64))?),
        _ => None,
    };
    match (estimated, prior) {
        (Some(homography), _) => Ok(RegistrationResult {
            homography,
            n_matches: fit.n_matches,
            n_inliers: fit.n_inliers,
            used_fallback: false,
            mean_reproj_px: fit.mean_error,
        }),
        (None, Some(rig)) => Ok(RegistrationResult {
            homography: rig.prior,
            n_matches: fit.n_matches,
            n_inliers: fit.n_inliers,
            used_fallback: true,
            mean_reproj_px: 0.0,
        }),
        (None, None) => Err(Error::RegistrationFailed),
    }
}

/// Registers a visual frame against the 8-bit rendering of its thermal
/// pair.
pub fn register_pair(
    visual: &VisualFrame,
    thermal: &GrayFrame,
    prior: Option<&RigCalibration>,
    params: &RegistrationParams,
) -> Result<RegistrationResult> {
    let factor = downscale_factor(visual.width(), visual.height(), thermal.width(), thermal.height())?;
    let pattern = TestPattern::standard();
    let v = prepare_visual(visual, factor, &params.orb, &pattern)?;
    let t = PreparedImage::new(thermal.clone(), &params.orb, &pattern);
    register_with_prior(&v, factor, &t, prior, params)
}
