//! 68-point landmarks, facial regions of interest, and their transfer into
//! thermal coordinates.
//!
//! Region geometry uses only landmark-derived lengths. With `D` the
//! distance between the two eye centroids:
//!
//! * nose: bounding box of points 27-35
//! * eyes: bounding box of 36-41 / 42-47, dilated 20% about its center
//! * forehead: x-span of the brows (17-26), from `min_y(brows) - 0.5 D`
//!   down to `min_y(brows)`
//! * cheeks: squares of side `0.3 D` centered at the centroids of
//!   {2, 31, 48} and {14, 35, 54}

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::calib::Homography;
use crate::error::{Error, Result};
use crate::math::Point2;

pub const LANDMARK_COUNT: usize = 68;

/// Named facial region. Ordering follows the feature-column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    Nose,
    Forehead,
    RightCheek,
    LeftCheek,
    RightEye,
    LeftEye,
}

impl Region {
    pub const ALL: [Region; 6] = [Region::Nose, Region::Forehead, Region::RightCheek, Region::LeftCheek, Region::RightEye, Region::LeftEye];
    pub const WITHOUT_EYES: [Region; 4] = [Region::Nose, Region::Forehead, Region::RightCheek, Region::LeftCheek];

    pub fn name(self) -> &'static str {
        match self {
            Region::Nose => "nose",
            Region::Forehead => "forehead",
            Region::RightCheek => "right_cheek",
            Region::LeftCheek => "left_cheek",
            Region::RightEye => "right_eye",
            Region::LeftEye => "left_eye",
        }
    }

    pub fn from_name(name: &str) -> Option<Region> {
        Region::ALL.into_iter().find(|r| r.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_eye(self) -> bool {
        matches!(self, Region::RightEye | Region::LeftEye)
    }
}

/// Axis-aligned rectangle `[x0, x1) x [y0, y1)` in continuous pixel
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn bounding(points: impl IntoIterator<Item = Point2>) -> Self {
        let mut r = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.x0 < self.x1 && self.y0 < self.y1
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn corners(&self) -> [Point2; 4] {
        [Point2::new(self.x0, self.y0), Point2::new(self.x1, self.y0), Point2::new(self.x1, self.y1), Point2::new(self.x0, self.y1)]
    }

    pub fn clip(&self, width: f64, height: f64) -> Rect {
        Rect::new(self.x0.clamp(0.0, width), self.y0.clamp(0.0, height), self.x1.clamp(0.0, width), self.y1.clamp(0.0, height))
    }

    /// Expands to whole pixels. Coordinates within 1e-9 of an integer are
    /// treated as that integer.
    pub fn round_outward(&self) -> Rect {
        Rect::new(libm::floor(self.x0 + 1e-9), libm::floor(self.y0 + 1e-9), libm::ceil(self.x1 - 1e-9), libm::ceil(self.y1 - 1e-9))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }
}

/// Exactly 68 finite points in visual full-resolution coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: Vec<Point2>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::LandmarkCount(points.len()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLandmark(i));
        }
        Ok(Self { points })
    }

    /// Additionally checks every point lies within `[0, w] x [0, h]`.
    pub fn new_within(points: Vec<Point2>, width: f64, height: f64) -> Result<Self> {
        let set = Self::new(points)?;
        if let Some(i) = set.points.iter().position(|p| p.x < 0.0 || p.y < 0.0 || p.x > width || p.y > height) {
            return Err(Error::LandmarkOutOfBounds(i));
        }
        Ok(set)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    fn centroid(&self, idx: impl IntoIterator<Item = usize>) -> Point2 {
        let (mut x, mut y, mut n) = (0.0, 0.0, 0.0);
        for i in idx {
            x += self.points[i].x;
            y += self.points[i].y;
            n += 1.0;
        }
        Point2::new(x / n, y / n)
    }

    /// Distance between the centroids of the two eyes.
    pub fn interocular(&self) -> f64 {
        self.centroid(36..42).distance(self.centroid(42..48))
    }

    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> LandmarkSet {
        LandmarkSet { points: self.points.iter().map(|&p| f(p)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Visual,
    Thermal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoiSet {
    pub space: Space,
    pub regions: BTreeMap<Region, Rect>,
}

impl RoiSet {
    pub fn get(&self, r: Region) -> Option<&Rect> {
        self.regions.get(&r)
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// Tunable region proportions, in units of the interocular distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiGeometry {
    pub forehead_height: f64,
    pub cheek_side: f64,
    pub eye_dilation: f64,
    pub min_interocular_px: f64,
}

impl Default for RoiGeometry {
    fn default() -> Self {
        Self { forehead_height: 0.5, cheek_side: 0.3, eye_dilation: 0.2, min_interocular_px: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiOptions {
    pub include_eyes: bool,
    pub geometry: RoiGeometry,
    /// Frame size to clip against; `None` leaves rectangles unclipped.
    pub bounds: Option<(f64, f64)>,
}

impl RoiOptions {
    pub fn new(include_eyes: bool, bounds: Option<(f64, f64)>) -> Self {
        Self { include_eyes, geometry: RoiGeometry::default(), bounds }
    }
}

/// Derives the facial regions in visual coordinates.
pub fn compute_rois(lm: &LandmarkSet, opts: &RoiOptions) -> Result<RoiSet> {
    let g = &opts.geometry;
    let d = lm.interocular();
    if !(d >= g.min_interocular_px) {
        return Err(Error::FaceBelowMinimumScale);
    }
    let pts = lm.points();
    let bbox = |range: core::ops::Range<usize>| Rect::bounding(range.map(|i| pts[i]));
    let dilate = |r: Rect, f: f64| {
        let c = r.center();
        let (hw, hh) = (0.5 * r.width() * (1.0 + f), 0.5 * r.height() * (1.0 + f));
        Rect::new(c.x - hw, c.y - hh, c.x + hw, c.y + hh)
    };
    let square = |c: Point2, side: f64| Rect::new(c.x - 0.5 * side, c.y - 0.5 * side, c.x + 0.5 * side, c.y + 0.5 * side);

    let brows = bbox(17..27);
    let mut regions = BTreeMap::new();
    regions.insert(Region::Nose, bbox(27..36));
    regions.insert(Region::Forehead, Rect::new(brows.x0, brows.y0 - g.forehead_height * d, brows.x1, brows.y0));
    regions.insert(Region::RightCheek, square(lm.centroid([2, 31, 48]), g.cheek_side * d));
    regions.insert(Region::LeftCheek, square(lm.centroid([14, 35, 54]), g.cheek_side * d));
    if opts.include_eyes {
        regions.insert(Region::RightEye, dilate(bbox(36..42), g.eye_dilation));
        regions.insert(Region::LeftEye, dilate(bbox(42..48), g.eye_dilation));
    }
    if let Some((w, h)) = opts.bounds {
        regions = regions.into_iter().map(|(k, r)| (k, r.clip(w, h))).collect();
    }
    regions.retain(|_, r| r.is_valid());
    Ok(RoiSet { space: Space::Visual, regions })
}

/// A region removed during transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroppedRegion {
    pub region: Region,
    /// Clipped area in thermal px² before rounding.
    pub area: f64,
}

/// Minimum clipped area (thermal px²) for a transferred region.
pub const MIN_THERMAL_AREA: f64 = 4.0;

/// Maps each rectangle's corners through `h`, takes the bounding box,
/// clips it to the thermal frame and rounds outward to whole pixels.
/// Regions whose clipped (unrounded) area is below 4 px² are dropped and
/// reported.
pub fn transfer_rois(r: &RoiSet, h: &Homography, thermal_width: u32, thermal_height: u32) -> Result<(RoiSet, Vec<DroppedRegion>)> {
    let (w, hgt) = (thermal_width as f64, thermal_height as f64);
    let mut regions = BTreeMap::new();
    let mut dropped = Vec::new();
    for (&region, rect) in &r.regions {
        let mapped = Rect::bounding(rect.corners().map(|p| h.apply(p)));
        let finite = [mapped.x0, mapped.y0, mapped.x1, mapped.y1].iter().all(|v| v.is_finite());
        let clipped = if finite { mapped.clip(w, hgt) } else { Rect::new(0.0, 0.0, 0.0, 0.0) };
        if clipped.area() < MIN_THERMAL_AREA {
            dropped.push(DroppedRegion { region, area: clipped.area() });
            continue;
        }
        regions.insert(region, clipped.round_outward().clip(w, hgt));
    }
    if regions.is_empty() {
        return Err(Error::NoUsableRoi);
    }
    Ok((RoiSet { space: Space::Thermal, regions }, dropped))
}

/// Source of per-frame landmarks. Absence is a value, not an error.
pub trait LandmarkProvider {
    fn landmarks(&self, frame_id: u64) -> Result<Option<LandmarkSet>>;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic() -> Vec<Point2> {
        (0..68).map(|i| Point2::new(100.0 + i as f64, 200.0 + (i % 7) as f64 * 3.0)).collect()
    }

    #[test]
    fn landmark_count_enforced() {
        let mut p = synthetic();
        p.pop();
        assert_eq!(LandmarkSet::new(p), Err(Error::LandmarkCount(67)));
        let mut p = synthetic();
        p[5].x = f64::NAN;
        assert_eq!(LandmarkSet::new(p), Err(Error::NonFiniteLandmark(5)));
        assert_eq!(LandmarkSet::new_within(synthetic(), 150.0, 1000.0), Err(Error::LandmarkOutOfBounds(51)));
    }

    #[test]
    fn nose_is_bounding_box() {
        let mut p: Vec<Point2> = synthetic();
        // eyes far enough apart
        p[36..42].fill(Point2::new(20.0, 30.0));
        p[42..48].fill(Point2::new(80.0, 30.0));
        p[27..36].fill(Point2::new(50.0, 50.0));
        p[27] = Point2::new(48.0, 40.0);
        p[35] = Point2::new(56.0, 60.0);
        let lm = LandmarkSet::new(p).unwrap();
        let rois = compute_rois(&lm, &RoiOptions::new(true, None)).unwrap();
        assert_eq!(rois.get(Region::Nose), Some(&Rect::new(48.0, 40.0, 56.0, 60.0)));
    }

    #[test]
    fn tiny_face_rejected() {
        let p: Vec<Point2> = (0..68).map(|_| Point2::new(10.0, 10.0)).collect();
        let lm = LandmarkSet::new(p).unwrap();
        assert_eq!(compute_rois(&lm, &RoiOptions::new(true, None)), Err(Error::FaceBelowMinimumScale));
    }

    fn one_region(r: Rect) -> RoiSet {
        let mut regions = BTreeMap::new();
        regions.insert(Region::Nose, r);
        RoiSet { space: Space::Visual, regions }
    }

    #[test]
    fn transfer_identity_and_scale() {
        let set = one_region(Rect::new(10.0, 20.0, 30.0, 44.0));
        let (t, dropped) = transfer_rois(&set, &Homography::IDENTITY, 160, 120).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(t.get(Region::Nose), Some(&Rect::new(10.0, 20.0, 30.0, 44.0)));

        let set = one_region(Rect::new(403.0, 300.0, 517.0, 421.0));
        let (t, _) = transfer_rois(&set, &Homography::scale(0.125), 160, 120).unwrap();
        // 50.375 → 50, 37.5 → 37, 64.625 → 65, 52.625 → 53
        assert_eq!(t.get(Region::Nose), Some(&Rect::new(50.0, 37.0, 65.0, 53.0)));
    }

    #[test]
    fn transfer_drops_outside_regions() {
        let mut regions = BTreeMap::new();
        regions.insert(Region::Nose, Rect::new(10.0, 10.0, 20.0, 20.0));
        regions.insert(Region::Forehead, Rect::new(500.0, 500.0, 520.0, 520.0));
        let set = RoiSet { space: Space::Visual, regions };
        let (t, dropped) = transfer_rois(&set, &Homography::IDENTITY, 160, 120).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].region, Region::Forehead);

        let outside = one_region(Rect::new(500.0, 500.0, 520.0, 520.0));
        assert_eq!(transfer_rois(&outside, &Homography::IDENTITY, 160, 120), Err(Error::NoUsableRoi));
    }
}
