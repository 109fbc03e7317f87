//! Scene geometry and frame rendering.
//!
//! The scene lives in visual pixel coordinates: a dark background, a face
//! oval, and two blocks of random bright fiducial cells either side of the
//! face. The visual frame samples it directly; the thermal frame samples it
//! through the inverse of the planted visual-to-thermal homography with
//! 8x8 supersampling, paints each facial region as a uniform patch and adds
//! per-pixel camera noise.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::LayerTemps;
use crate::calib::{Correspondence, Homography};
use crate::error::Result;
use crate::frame::{ThermalFrame, VisualFrame, THERMAL_HEIGHT, THERMAL_WIDTH, VISUAL_HEIGHT, VISUAL_WIDTH};
use crate::math::Point2;
use crate::roi::{compute_rois, transfer_rois, LandmarkProvider, LandmarkSet, Rect, Region, RoiOptions};
use crate::thermal::celsius_to_raw;

/// Interocular distance in visual pixels at 1 m.
pub const INTEROCULAR_PX_AT_1M: f64 = 192.0;

pub const BACKGROUND_RGB: [u8; 3] = [40, 45, 50];
pub const FACE_RGB: [u8; 3] = [210, 160, 130];
pub const FIDUCIAL_RGB: [u8; 3] = [250, 250, 250];

const FIDUCIAL_CELL_PX: f64 = 32.0;
const FIDUCIAL_COLS: usize = 7;
const FIDUCIAL_ROWS: usize = 21;
const FIDUCIAL_ORIGINS: [(f64, f64); 2] = [(136.0, 144.0), (904.0, 144.0)];

/// Visual-to-thermal map of the simulated rig: the 8x downscale, a small
/// rotation about the thermal centre, an offset, and a slight keystone.
pub fn planted_homography() -> Homography {
    let (c, s) = (libm::cos(0.8f64.to_radians()), libm::sin(0.8f64.to_radians()));
    let k = 0.125;
    let (cx, cy) = (80.0, 60.0);
    let (tx, ty) = (1.7, -1.2);
    // T(c + t) R T(-c) S(k), then a keystone in the last row
    let m = [
        [k * c, -k * s, cx + tx - (c * cx - s * cy)],
        [k * s, k * c, cy + ty - (s * cx + c * cy)],
        [2.0e-6, -1.5e-6, 1.0],
    ];
    Homography::from_matrix(m).expect("planted homography is invertible")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Background,
    Face,
    Fiducial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub distance_m: f64,
    pub planted: Homography,
    pub landmarks: LandmarkSet,
    /// Interocular distance in visual pixels.
    pub interocular_px: f64,
    pub face_center: Point2,
    pub face_semi_axes: (f64, f64),
    /// One bit per fiducial cell, zone-major then row-major.
    fiducial_cells: Vec<bool>,
}

/// 68-point template in units of the interocular distance, origin between
/// the eyes, y downwards.
fn template() -> [(f64, f64); 68] {
    let mut t = [(0.0, 0.0); 68];
    for (i, p) in t.iter_mut().take(17).enumerate() {
        let a = core::f64::consts::PI * i as f64 / 16.0;
        *p = (-1.05 * libm::cos(a), 0.1 + 1.55 * libm::sin(a));
    }
    for i in 0..5 {
        let arch = 0.35 + 0.07 * libm::sin(core::f64::consts::PI * i as f64 / 4.0);
        t[17 + i] = (-0.7 + 0.1375 * i as f64, -arch);
        t[22 + i] = (0.15 + 0.1375 * i as f64, -(0.35 + 0.07 * libm::sin(core::f64::consts::PI * (4 - i) as f64 / 4.0)));
    }
    let rest: [(f64, f64); 41] = [
        // nose bridge and nostrils
        (0.0, 0.0),
        (0.0, 0.18),
        (0.0, 0.36),
        (0.0, 0.55),
        (-0.14, 0.62),
        (-0.07, 0.66),
        (0.0, 0.68),
        (0.07, 0.66),
        (0.14, 0.62),
        // eyes
        (-0.65, 0.0),
        (-0.55, -0.04),
        (-0.45, -0.04),
        (-0.35, 0.0),
        (-0.45, 0.04),
        (-0.55, 0.04),
        (0.35, 0.0),
        (0.45, -0.04),
        (0.55, -0.04),
        (0.65, 0.0),
        (0.55, 0.04),
        (0.45, 0.04),
        // mouth, outer then inner
        (-0.4, 1.15),
        (-0.25, 1.08),
        (-0.1, 1.05),
        (0.0, 1.06),
        (0.1, 1.05),
        (0.25, 1.08),
        (0.4, 1.15),
        (0.25, 1.24),
        (0.1, 1.28),
        (0.0, 1.29),
        (-0.1, 1.28),
        (-0.25, 1.24),
        (-0.32, 1.15),
        (-0.1, 1.12),
        (0.0, 1.12),
        (0.1, 1.12),
        (0.32, 1.15),
        (0.1, 1.18),
        (0.0, 1.19),
        (-0.1, 1.18),
    ];
    t[27..].copy_from_slice(&rest);
    t
}

/// Ground-truth landmarks for a face whose eye midpoint is `center`.
pub fn face_landmarks(center: Point2, interocular_px: f64) -> LandmarkSet {
    let pts = template().iter().map(|&(x, y)| Point2::new(center.x + x * interocular_px, center.y + y * interocular_px)).collect();
    LandmarkSet::new(pts).expect("template has 68 finite points")
}

impl Scene {
    pub fn new(distance_m: f64, seed: u64) -> Self {
        let d = INTEROCULAR_PX_AT_1M / distance_m;
        let eyes = Point2::new(640.0, 430.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(4);
        let fiducial_cells = (0..2 * FIDUCIAL_COLS * FIDUCIAL_ROWS).map(|_| rng.random_bool(0.5)).collect();
        Self {
            distance_m,
            planted: planted_homography(),
            landmarks: face_landmarks(eyes, d),
            interocular_px: d,
            face_center: Point2::new(eyes.x, eyes.y + 0.3 * d),
            face_semi_axes: (1.2 * d, 1.6 * d),
            fiducial_cells,
        }
    }

    fn is_fiducial(&self, p: Point2) -> bool {
        for (z, &(ox, oy)) in FIDUCIAL_ORIGINS.iter().enumerate() {
            let (u, v) = ((p.x - ox) / FIDUCIAL_CELL_PX, (p.y - oy) / FIDUCIAL_CELL_PX);
            if u >= 0.0 && v >= 0.0 && u < FIDUCIAL_COLS as f64 && v < FIDUCIAL_ROWS as f64 {
                let idx = z * FIDUCIAL_COLS * FIDUCIAL_ROWS + v as usize * FIDUCIAL_COLS + u as usize;
                return self.fiducial_cells[idx];
            }
        }
        false
    }

    pub fn layer_at(&self, p: Point2) -> Layer {
        let (a, b) = self.face_semi_axes;
        let (dx, dy) = ((p.x - self.face_center.x) / a, (p.y - self.face_center.y) / b);
        if dx * dx + dy * dy <= 1.0 {
            Layer::Face
        } else if self.is_fiducial(p) {
            Layer::Fiducial
        } else {
            Layer::Background
        }
    }

    /// Facial regions in thermal pixels under the planted map, as the
    /// pipeline would derive them.
    pub fn thermal_rois(&self) -> Result<Vec<(Region, Rect)>> {
        let opts = RoiOptions::new(true, Some((VISUAL_WIDTH as f64, VISUAL_HEIGHT as f64)));
        let visual = compute_rois(&self.landmarks, &opts)?;
        let (thermal, _) = transfer_rois(&visual, &self.planted, THERMAL_WIDTH, THERMAL_HEIGHT)?;
        Ok(thermal.regions.into_iter().collect())
    }
}

pub fn render_visual(scene: &Scene, timestamp_ms: u64) -> VisualFrame {
    let (w, h) = (VISUAL_WIDTH, VISUAL_HEIGHT);
    let mut rgb = Vec::with_capacity((w * h * 3) as usize);
    for y in 0..h {
        for x in 0..w {
            let c = match scene.layer_at(Point2::new(x as f64 + 0.5, y as f64 + 0.5)) {
                Layer::Background => BACKGROUND_RGB,
                Layer::Face => FACE_RGB,
                Layer::Fiducial => FIDUCIAL_RGB,
            };
            rgb.extend_from_slice(&c);
        }
    }
    VisualFrame::new(w, h, rgb, timestamp_ms).expect("buffer matches dimensions")
}

const SUPERSAMPLE: usize = 8;

/// Precomputed thermal coverage of a static scene.
#[derive(Debug, Clone)]
pub struct ThermalRenderer {
    /// Background/face/fiducial subsample counts per pixel.
    coverage: Vec<[u8; 3]>,
    patches: Vec<(Region, Rect)>,
}

impl ThermalRenderer {
    pub fn new(scene: &Scene) -> Result<Self> {
        let inv = scene.planted.inverse()?;
        let (w, h) = (THERMAL_WIDTH as usize, THERMAL_HEIGHT as usize);
        let mut coverage = alloc::vec![[0u8; 3]; w * h];
        for y in 0..h {
            for x in 0..w {
                let cell = &mut coverage[y * w + x];
                for j in 0..SUPERSAMPLE {
                    for i in 0..SUPERSAMPLE {
                        let s = Point2::new(x as f64 + (i as f64 + 0.5) / SUPERSAMPLE as f64, y as f64 + (j as f64 + 0.5) / SUPERSAMPLE as f64);
                        let slot = match scene.layer_at(inv.apply(s)) {
                            Layer::Background => 0,
                            Layer::Face => 1,
                            Layer::Fiducial => 2,
                        };
                        cell[slot] += 1;
                    }
                }
            }
        }
        Ok(Self { coverage, patches: scene.thermal_rois()? })
    }

    /// Regions painted as uniform patches, in thermal pixels.
    pub fn patches(&self) -> &[(Region, Rect)] {
        &self.patches
    }

    pub fn render(&self, temps: &LayerTemps, timestamp_ms: u64) -> ThermalFrame {
        let (w, h) = (THERMAL_WIDTH as usize, THERMAL_HEIGHT as usize);
        let n = (SUPERSAMPLE * SUPERSAMPLE) as f64;
        let mut celsius: Vec<f64> = self
            .coverage
            .iter()
            .map(|c| (c[0] as f64 * temps.background + c[1] as f64 * temps.face + c[2] as f64 * temps.fiducial) / n)
            .collect();
        // a one-pixel ring of the region's temperature absorbs small ROI
        // offsets; cores are painted last so neighbours never overwrite them
        for grow in [1.0, 0.0] {
            for (region, rect) in &self.patches {
                let Some(&t) = temps.regions.get(region) else { continue };
                let r = Rect::new(rect.x0 - grow, rect.y0 - grow, rect.x1 + grow, rect.y1 + grow).clip(w as f64, h as f64);
                for y in r.y0 as usize..r.y1 as usize {
                    for x in r.x0 as usize..r.x1 as usize {
                        celsius[y * w + x] = t;
                    }
                }
            }
        }
        if temps.noise_sigma_c > 0.0 {
            let mut rng = super::rng_stream(temps.noise_seed, 6);
            for c in &mut celsius {
                let z: f64 = rng.sample(StandardNormal);
                *c += temps.noise_sigma_c * z;
            }
        }
        let raw = celsius.into_iter().map(celsius_to_raw).collect();
        ThermalFrame::new(w as u32, h as u32, raw, timestamp_ms, true).expect("buffer matches dimensions")
    }
}

/// Checkerboard calibration views: 9x6 inner corners at varied poses in
/// the visual frame, mapped through `planted` with gaussian noise (thermal
/// pixels) on the destination.
pub fn checkerboard_views(planted: &Homography, n_views: usize, noise_px: f64, seed: u64) -> Vec<Vec<Correspondence>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(5);
    (0..n_views)
        .map(|_| {
            let spacing = rng.random_range(60.0..100.0);
            let angle = rng.random_range(-0.2..0.2);
            let (c, s) = (libm::cos(angle), libm::sin(angle));
            let half = (4.0 * spacing, 2.5 * spacing);
            let margin = 1.1 * libm::hypot(half.0, half.1);
            let cx = rng.random_range(margin..VISUAL_WIDTH as f64 - margin);
            let cy = rng.random_range(margin.min(VISUAL_HEIGHT as f64 / 2.0 - 1.0)..(VISUAL_HEIGHT as f64 - margin).max(VISUAL_HEIGHT as f64 / 2.0));
            let mut corners = Vec::with_capacity(54);
            for j in 0..6 {
                for i in 0..9 {
                    let (u, v) = (i as f64 * spacing - half.0, j as f64 * spacing - half.1);
                    let src = Point2::new(cx + c * u - s * v, cy + s * u + c * v);
                    let mut dst = planted.apply(src);
                    dst.x += noise_px * rng.sample::<f64, _>(StandardNormal);
                    dst.y += noise_px * rng.sample::<f64, _>(StandardNormal);
                    corners.push(Correspondence { src, dst });
                }
            }
            corners
        })
        .collect()
}

/// The same landmarks for every frame of a static-pose session.
#[derive(Debug, Clone)]
pub struct StaticLandmarks(pub LandmarkSet);

impl LandmarkProvider for StaticLandmarks {
    fn landmarks(&self, _frame_id: u64) -> Result<Option<LandmarkSet>> {
        Ok(Some(self.0.clone()))
    }
}
