//! Visual-to-thermal planar registration: normalized DLT, RANSAC, and the
//! checkerboard rig prior.
//!
//! Homographies map visual pixel coordinates to thermal pixel coordinates
//! (`dst ~ H src`). Both point sets are Hartley-normalized (zero mean,
//! mean distance sqrt(2)) before the 2n x 9 design matrix is solved by
//! SVD, and the result is rescaled so `h33 = 1`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{jacobi_svd, mat3_det, mat3_inverse, mat3_mul, Mat3, Point2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    /// Visual pixel coordinates.
    pub src: Point2,
    /// Thermal pixel coordinates.
    pub dst: Point2,
}

impl Correspondence {
    pub fn new(sx: f64, sy: f64, dx: f64, dy: f64) -> Self {
        Self { src: Point2::new(sx, sy), dst: Point2::new(dx, dy) }
    }

    pub fn is_finite(&self) -> bool {
        self.src.is_finite() && self.dst.is_finite()
    }
}

/// 3x3 projective map normalized so that `h33 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Mat3,
}

impl Homography {
    pub const IDENTITY: Homography = Homography { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };

    /// Normalizes by `h33` and checks invertibility (`|det| > 1e-12`).
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::SingularHomography);
        }
        let s = m[2][2];
        if s.abs() < 1e-15 {
            return Err(Error::SingularHomography);
        }
        let mut n = m;
        n.iter_mut().flatten().for_each(|v| *v /= s);
        if mat3_det(&n).abs() <= 1e-12 {
            return Err(Error::SingularHomography);
        }
        Ok(Self { m: n })
    }

    pub fn scale(s: f64) -> Self {
        Self { m: [[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, 1.0]] }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self { m: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]] }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    /// Row-major `h00..h22`.
    pub fn to_array(&self) -> [f64; 9] {
        let m = &self.m;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn from_array(a: [f64; 9]) -> Result<Self> {
        Self::from_matrix([[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]])
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let m = &self.m;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        Point2::new(
            (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
        )
    }

    pub fn inverse(&self) -> Result<Self> {
        mat3_inverse(&self.m).ok_or(Error::SingularHomography).and_then(Self::from_matrix)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Homography) -> Result<Self> {
        Self::from_matrix(mat3_mul(&self.m, &other.m))
    }

    /// Mean linear scale of the affine part, used to express source-side
    /// residuals in destination pixels.
    pub fn linear_scale(&self) -> f64 {
        let m = &self.m;
        libm::sqrt((m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs())
    }

    pub fn max_abs_diff(&self, other: &Homography) -> f64 {
        self.to_array().iter().zip(other.to_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Hartley normalization: returns normalized points and the transform.
fn normalize(points: &[Point2]) -> Result<(Vec<Point2>, Mat3)> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_dist = points.iter().map(|p| libm::hypot(p.x - cx, p.y - cy)).sum::<f64>() / n;
    if !(mean_dist > 1e-12) {
        return Err(Error::DegenerateConfiguration);
    }
    let s = core::f64::consts::SQRT_2 / mean_dist;
    let t = [[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]];
    let out = points.iter().map(|p| Point2::new(s * (p.x - cx), s * (p.y - cy))).collect();
    Ok((out, t))
}

fn collinear(a: Point2, b: Point2, c: Point2) -> bool {
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let scale = a.distance(b).max(a.distance(c)).max(b.distance(c));
    cross.abs() <= 1e-9 * scale * scale
}

fn minimal_set_degenerate(corrs: &[Correspondence]) -> bool {
    let side = |f: fn(&Correspondence) -> Point2| {
        let p: Vec<Point2> = corrs.iter().map(f).collect();
        collinear(p[0], p[1], p[2]) || collinear(p[0], p[1], p[3]) || collinear(p[0], p[2], p[3]) || collinear(p[1], p[2], p[3])
    };
    side(|c| c.src) || side(|c| c.dst)
}

/// Normalized DLT over `>= 4` correspondences.
pub fn estimate_homography_dlt(corrs: &[Correspondence]) -> Result<Homography> {
    if corrs.len() < 4 {
        return Err(Error::TooFewCorrespondences(corrs.len()));
    }
    if corrs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("non-finite correspondence"));
    }
    if corrs.len() == 4 && minimal_set_degenerate(corrs) {
        return Err(Error::DegenerateConfiguration);
    }
    let src: Vec<Point2> = corrs.iter().map(|c| c.src).collect();
    let dst: Vec<Point2> = corrs.iter().map(|c| c.dst).collect();
    let (src_n, t_src) = normalize(&src)?;
    let (dst_n, t_dst) = normalize(&dst)?;

    let rows = 2 * corrs.len();
    let mut a = vec![0.0; rows * 9];
    for (i, (p, q)) in src_n.iter().zip(&dst_n).enumerate() {
        let (x, y, u, v) = (p.x, p.y, q.x, q.y);
        a[(2 * i) * 9..(2 * i + 1) * 9].copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        a[(2 * i + 1) * 9..(2 * i + 2) * 9].copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }
    let svd = jacobi_svd(&a, rows, 9);
    let sv = &svd.singular_values;
    // a second (near-)null direction means the points do not pin down H
    if sv[7] <= 1e-9 * sv[0] {
        return Err(Error::DegenerateConfiguration);
    }
    let h = svd.right_vector(8);
    let hn = [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], h[8]]];
    let t_dst_inv = mat3_inverse(&t_dst).ok_or(Error::DegenerateConfiguration)?;
    let denorm = mat3_mul(&mat3_mul(&t_dst_inv, &hn), &t_src);
    Homography::from_matrix(denorm).map_err(|_| Error::DegenerateConfiguration)
}

/// Symmetric transfer error in destination pixels.
///
/// The backward residual `|H^-1 dst - src|` lives in source pixels, so it
/// is multiplied by the homography's linear scale before the two sides are
/// combined as `sqrt((fwd^2 + bwd^2) / 2)`. For same-resolution maps this
/// is the plain symmetric error.
pub fn symmetric_error(h: &Homography, h_inv: &Homography, c: &Correspondence) -> f64 {
    let fwd = h.apply(c.src).distance(c.dst);
    let bwd = h_inv.apply(c.dst).distance(c.src) * h.linear_scale();
    let e = libm::sqrt(0.5 * (fwd * fwd + bwd * bwd));
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    pub max_iter: usize,
    pub inlier_px: f64,
    pub seed: u64,
}

impl RansacParams {
    pub fn with_seed(seed: u64) -> Self {
        Self { max_iter: 2000, inlier_px: 2.0, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacFit {
    pub homography: Homography,
    pub inliers: Vec<bool>,
    /// Mean symmetric error over the inlier set.
    pub mean_error: f64,
    /// Root-mean-square symmetric error over the inlier set.
    pub rms_error: f64,
}

impl RansacFit {
    pub fn n_inliers(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

fn score(h: &Homography, corrs: &[Correspondence], inlier_px: f64) -> Option<(Vec<bool>, usize, f64)> {
    let h_inv = h.inverse().ok()?;
    let mut mask = Vec::with_capacity(corrs.len());
    let (mut count, mut total) = (0usize, 0.0);
    for c in corrs {
        let e = symmetric_error(h, &h_inv, c);
        let inlier = e < inlier_px;
        if inlier {
            count += 1;
            total += e;
        }
        mask.push(inlier);
    }
    Some((mask, count, total))
}

/// RANSAC over minimal 4-point samples followed by iterated DLT refits on
/// the consensus set. Deterministic for a fixed seed.
///
/// The returned inlier mask is recomputed from the final model, so every
/// inlier's error is below `inlier_px`.
pub fn ransac_homography(corrs: &[Correspondence], params: &RansacParams) -> Result<RansacFit> {
    if corrs.len() < 4 {
        return Err(Error::TooFewCorrespondences(corrs.len()));
    }
    if !(params.inlier_px > 0.0) {
        return Err(Error::InvalidParameter("inlier_px must be positive"));
    }
    let n = corrs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(Homography, usize, f64)> = None;
    let mut needed = params.max_iter;
    let mut iter = 0;

    while iter < needed.min(params.max_iter) {
        iter += 1;
        let mut idx = [0usize; 4];
        let mut k = 0;
        while k < 4 {
            let cand = rng.random_range(0..n);
            if !idx[..k].contains(&cand) {
                idx[k] = cand;
                k += 1;
            }
        }
        let sample = [corrs[idx[0]], corrs[idx[1]], corrs[idx[2]], corrs[idx[3]]];
        let Ok(h) = estimate_homography_dlt(&sample) else { continue };
        let Some((_, count, total)) = score(&h, corrs, params.inlier_px) else { continue };
        let better = match &best {
            None => count >= 4,
            Some((_, bc, bt)) => count > *bc || (count == *bc && total < *bt),
        };
        if better {
            best = Some((h, count, total));
            // adaptive stopping at 99.9% confidence
            let w = count as f64 / n as f64;
            let p_fail = 1.0 - libm::pow(w, 4.0);
            needed = if p_fail <= 1e-12 {
                iter
            } else {
                let est = libm::log(1e-3) / libm::log(p_fail);
                if est.is_finite() { (libm::ceil(est) as usize).max(iter) } else { params.max_iter }
            };
        }
    }

    let (mut h, _, _) = best.ok_or(Error::RegistrationFailed)?;
    let (mut mask, mut count, _) = score(&h, corrs, params.inlier_px).ok_or(Error::RegistrationFailed)?;
    for _ in 0..10 {
        let consensus: Vec<Correspondence> = corrs.iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| *c).collect();
        let Ok(refit) = estimate_homography_dlt(&consensus) else { break };
        let Some((refit_mask, refit_count, _)) = score(&refit, corrs, params.inlier_px) else { break };
        if refit_count < count {
            break;
        }
        let stable = refit_mask == mask;
        h = refit;
        mask = refit_mask;
        count = refit_count;
        if stable {
            break;
        }
    }
    if count < 4 {
        return Err(Error::RegistrationFailed);
    }

    let h_inv = h.inverse()?;
    let errors: Vec<f64> = corrs.iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| symmetric_error(&h, &h_inv, c)).collect();
    let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
    let rms_error = libm::sqrt(errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64);
    Ok(RansacFit { homography: h, inliers: mask, mean_error, rms_error })
}

/// Registration prior estimated from checkerboard views.
#[derive(Debug, Clone, PartialEq)]
pub struct RigCalibration {
    pub prior: Homography,
    pub rms_residual: f64,
    pub frames_used: usize,
    pub inlier_fraction: f64,
}

/// Pools the correspondences of every checkerboard view and fits one
/// planar prior.
pub fn calibrate_rig(views: &[Vec<Correspondence>], params: &RansacParams) -> Result<RigCalibration> {
    if views.is_empty() {
        return Err(Error::EmptyCalibration);
    }
    if let Some(v) = views.iter().find(|v| v.len() < 4) {
        return Err(Error::TooFewCorrespondences(v.len()));
    }
    let pooled: Vec<Correspondence> = views.iter().flatten().copied().collect();
    let fit = ransac_homography(&pooled, params)?;
    Ok(RigCalibration {
        prior: fit.homography,
        rms_residual: fit.rms_error,
        frames_used: views.len(),
        inlier_fraction: fit.n_inliers() as f64 / pooled.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: &Homography) -> Vec<Correspondence> {
        [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]
            .iter()
            .map(|&(x, y)| {
                let d = h.apply(Point2::new(x, y));
                Correspondence::new(x, y, d.x, d.y)
            })
            .collect()
    }

    #[test]
    fn identity_from_four_points() {
        let h = estimate_homography_dlt(&square(&Homography::IDENTITY)).unwrap();
        assert!(h.max_abs_diff(&Homography::IDENTITY) < 1e-12);
    }

    #[test]
    fn translation_from_four_points() {
        let t = Homography::translation(2.0, 3.0);
        let h = estimate_homography_dlt(&square(&t)).unwrap();
        assert!(h.max_abs_diff(&t) < 1e-12, "{:?}", h);
    }

    #[test]
    fn too_few_and_collinear() {
        let c = square(&Homography::IDENTITY);
        assert_eq!(estimate_homography_dlt(&c[..3]), Err(Error::TooFewCorrespondences(3)));
        let line: Vec<Correspondence> = (0..4).map(|i| Correspondence::new(i as f64, 0.0, i as f64, 1.0)).collect();
        assert_eq!(estimate_homography_dlt(&line), Err(Error::DegenerateConfiguration));
        let params = RansacParams::with_seed(1);
        assert_eq!(ransac_homography(&c[..3], &params), Err(Error::TooFewCorrespondences(3)));
        // five points, four of them on a line: no usable configuration
        let mut many = line.clone();
        many.extend((0..4).map(|i| Correspondence::new(i as f64 * 2.0, 0.0, i as f64 * 2.0, 1.0)));
        assert_eq!(estimate_homography_dlt(&many), Err(Error::DegenerateConfiguration));
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(Homography::from_matrix([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_err());
        assert!(Homography::from_matrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn calibrate_rejects_empty() {
        assert_eq!(calibrate_rig(&[], &RansacParams::with_seed(0)), Err(Error::EmptyCalibration));
    }
}
