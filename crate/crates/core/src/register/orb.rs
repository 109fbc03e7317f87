//! Oriented FAST keypoints with steered BRIEF descriptors.
//!
//! FAST-9 segment test on the 16-pixel Bresenham circle, 3x3 non-maximum
//! suppression on the FAST score, Harris ranking, intensity-centroid
//! orientation over a radius-15 disk, and 256 binary tests on a 5x5
//! box-smoothed image steered by the orientation quantized to 30 bins.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::mask::MaskFrame;
use crate::frame::GrayFrame;

pub const DESCRIPTOR_BITS: usize = 256;
pub const ORIENTATION_BINS: usize = 30;
/// Keypoints keep this many pixels from every frame edge so the rotated
/// test pattern and its smoothing window stay inside the image.
pub const BORDER: u32 = 16;
const ORIENTATION_RADIUS: i32 = 15;
const PATTERN_RADIUS: f64 = 13.0;

const CIRCLE: [(i32, i32); 16] = [
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    /// Continuous coordinates of the pixel center.
    pub x: f64,
    pub y: f64,
    /// Harris corner score.
    pub response: f64,
    /// Radians in `[0, 2π)`.
    pub angle: f64,
}

impl Keypoint {
    pub fn orientation_bin(&self) -> usize {
        orientation_bin(self.angle)
    }
}

pub fn orientation_bin(angle: f64) -> usize {
    (libm::round(angle / (TAU / ORIENTATION_BINS as f64)) as usize) % ORIENTATION_BINS
}

/// 256-bit binary descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Descriptor(pub [u64; 4]);

impl Descriptor {
    pub const ZERO: Descriptor = Descriptor([0; 4]);
    pub const ONES: Descriptor = Descriptor([u64::MAX; 4]);

    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a ^ b).count_ones()).sum()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub keypoint: Keypoint,
    pub descriptor: Descriptor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbParams {
    pub fast_threshold: u8,
    pub max_keypoints: usize,
}

impl Default for OrbParams {
    fn default() -> Self {
        Self { fast_threshold: 20, max_keypoints: 500 }
    }
}

/// Fixed set of 256 point pairs inside a radius-13 disk, drawn once from
/// an isotropic Gaussian (sigma = 31/5) with a constant seed.
#[derive(Debug, Clone)]
pub struct TestPattern {
    pairs: Vec<[(f64, f64); 2]>,
}

impl Default for TestPattern {
    fn default() -> Self {
        Self::standard()
    }
}

impl TestPattern {
    pub fn standard() -> Self {
        let mut state = 0x0b5e_ed00_2f1c_u64;
        let mut next_unit = move || {
            // splitmix64
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            ((z >> 11) as f64 + 0.5) / (1u64 << 53) as f64
        };
        let sigma = 31.0 / 5.0;
        let mut point = || loop {
            let (u1, u2) = (next_unit(), next_unit());
            let r = sigma * libm::sqrt(-2.0 * libm::log(u1));
            let (x, y) = (libm::round(r * libm::cos(TAU * u2)), libm::round(r * libm::sin(TAU * u2)));
            if x * x + y * y <= PATTERN_RADIUS * PATTERN_RADIUS {
                return (x, y);
            }
        };
        let mut pairs = Vec::with_capacity(DESCRIPTOR_BITS);
        while pairs.len() < DESCRIPTOR_BITS {
            let (p, q) = (point(), point());
            if p != q && !pairs.contains(&[p, q]) {
                pairs.push([p, q]);
            }
        }
        Self { pairs }
    }

    pub fn pairs(&self) -> &[[(f64, f64); 2]] {
        &self.pairs
    }

    /// Evaluates the pattern rotated by `bin * 2π/30` against an
    /// arbitrary sampler of patch offsets. Bit `i` is set when the first
    /// point of pair `i` is darker than the second.
    pub fn steered_bits(&self, bin: usize, sample: impl Fn(f64, f64) -> f64) -> Descriptor {
        let theta = (bin % ORIENTATION_BINS) as f64 * TAU / ORIENTATION_BINS as f64;
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        let mut d = Descriptor::ZERO;
        for (i, [p, q]) in self.pairs.iter().enumerate() {
            let a = sample(c * p.0 - s * p.1, s * p.0 + c * p.1);
            let b = sample(c * q.0 - s * q.1, s * q.0 + c * q.1);
            if a < b {
                d.set(i);
            }
        }
        d
    }
}

fn arc_of_nine(bits: u32) -> bool {
    let mut x = bits | (bits << 16);
    for _ in 0..8 {
        x &= x >> 1;
    }
    x & 0xffff != 0
}

/// FAST-9 score at an interior pixel, `None` when the segment test fails.
fn fast_score(g: &GrayFrame, x: u32, y: u32, threshold: u8) -> Option<u32> {
    let p = g.at(x, y) as i32;
    let t = threshold as i32;
    let (mut bright, mut dark) = (0u32, 0u32);
    let mut vals = [0i32; 16];
    for (k, (dx, dy)) in CIRCLE.iter().enumerate() {
        let v = g.at((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i32;
        vals[k] = v;
        if v > p + t {
            bright |= 1 << k;
        } else if v < p - t {
            dark |= 1 << k;
        }
    }
    let score = |mask: u32| -> u32 {
        (0..16).filter(|k| mask >> k & 1 == 1).map(|k| ((vals[k] - p).abs() - t) as u32).sum()
    };
    match (arc_of_nine(bright), arc_of_nine(dark)) {
        (true, _) => Some(score(bright)),
        (_, true) => Some(score(dark)),
        _ => None,
    }
}

fn harris_response(g: &GrayFrame, x: u32, y: u32) -> f64 {
    let px = |xx: i32, yy: i32| g.at(xx as u32, yy as u32) as f64;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for dy in -3..=3 {
        for dx in -3..=3 {
            let (cx, cy) = (x as i32 + dx, y as i32 + dy);
            let ix = (px(cx + 1, cy - 1) + 2.0 * px(cx + 1, cy) + px(cx + 1, cy + 1))
                - (px(cx - 1, cy - 1) + 2.0 * px(cx - 1, cy) + px(cx - 1, cy + 1));
            let iy = (px(cx - 1, cy + 1) + 2.0 * px(cx, cy + 1) + px(cx + 1, cy + 1))
                - (px(cx - 1, cy - 1) + 2.0 * px(cx, cy - 1) + px(cx + 1, cy - 1));
            a += ix * ix;
            b += iy * iy;
            c += ix * iy;
        }
    }
    a * b - c * c - 0.04 * (a + b) * (a + b)
}

fn intensity_centroid_angle(g: &GrayFrame, x: u32, y: u32) -> f64 {
    let r = ORIENTATION_RADIUS;
    let (mut m10, mut m01) = (0.0f64, 0.0f64);
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let v = g.at((x as i32 + dx) as u32, (y as i32 + dy) as u32) as f64;
            m10 += dx as f64 * v;
            m01 += dy as f64 * v;
        }
    }
    if m10 == 0.0 && m01 == 0.0 {
        return 0.0;
    }
    let a = libm::atan2(m01, m10);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// 5x5 box sums (not divided) for every pixel, with edge clamping.
struct BoxSmoothed {
    width: u32,
    height: u32,
    sums: Vec<u32>,
}

impl BoxSmoothed {
    fn new(g: &GrayFrame) -> Self {
        let (w, h) = (g.width() as i64, g.height() as i64);
        let mut sums = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                let mut s = 0u32;
                for dy in -2..=2 {
                    for dx in -2..=2 {
                        let xx = (x + dx).clamp(0, w - 1) as u32;
                        let yy = (y + dy).clamp(0, h - 1) as u32;
                        s += g.at(xx, yy) as u32;
                    }
                }
                sums.push(s);
            }
        }
        Self { width: g.width(), height: g.height(), sums }
    }

    fn at_rounded(&self, x: f64, y: f64) -> f64 {
        let xi = (libm::round(x) as i64).clamp(0, self.width as i64 - 1) as usize;
        let yi = (libm::round(y) as i64).clamp(0, self.height as i64 - 1) as usize;
        self.sums[yi * self.width as usize + xi] as f64
    }
}

/// FAST corners inside `mask`, ranked by Harris response, top
/// `max_keypoints` kept, each with an orientation and steered descriptor.
pub fn detect_features(g: &GrayFrame, mask: &MaskFrame, params: &OrbParams, pattern: &TestPattern) -> Vec<Feature> {
    let (w, h) = (g.width(), g.height());
    if w <= 2 * BORDER || h <= 2 * BORDER {
        return Vec::new();
    }
    // FAST scores on the band that can host keypoints plus one pixel for NMS
    let mut scores = alloc::vec![0u32; (w * h) as usize];
    for y in (BORDER - 1)..(h - BORDER + 1) {
        for x in (BORDER - 1)..(w - BORDER + 1) {
            if let Some(s) = fast_score(g, x, y, params.fast_threshold) {
                scores[(y * w + x) as usize] = s + 1;
            }
        }
    }
    let mut candidates = Vec::new();
    for y in BORDER..(h - BORDER) {
        for x in BORDER..(w - BORDER) {
            let s = scores[(y * w + x) as usize];
            if s == 0 || !mask.get(x, y) {
                continue;
            }
            // strict maximum over earlier neighbours, non-strict over later
            // ones, so plateaus keep exactly their first pixel
            let mut is_max = true;
            'nms: for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let n = scores[((y as i32 + dy) as u32 * w + (x as i32 + dx) as u32) as usize];
                    let earlier = dy < 0 || (dy == 0 && dx < 0);
                    if n > s || (earlier && n == s) {
                        is_max = false;
                        break 'nms;
                    }
                }
            }
            if is_max {
                candidates.push((x, y, harris_response(g, x, y)));
            }
        }
    }
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.1.cmp(&b.1)).then(a.0.cmp(&b.0)));
    candidates.truncate(params.max_keypoints);

    let smooth = BoxSmoothed::new(g);
    candidates
        .into_iter()
        .map(|(x, y, response)| {
            let angle = intensity_centroid_angle(g, x, y);
            let keypoint = Keypoint { x: x as f64 + 0.5, y: y as f64 + 0.5, response, angle };
            let (cx, cy) = (x as f64, y as f64);
            let descriptor = pattern.steered_bits(keypoint.orientation_bin(), |dx, dy| smooth.at_rounded(cx + dx, cy + dy));
            Feature { keypoint, descriptor }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::mask::make_mask;

    fn square_image() -> GrayFrame {
        let (w, h) = (64u32, 64u32);
        let mut px = alloc::vec![0u8; (w * h) as usize];
        for y in 20..44 {
            for x in 20..44 {
                px[(y * w + x) as usize] = 255;
            }
        }
        GrayFrame::new(w, h, px).unwrap()
    }

    #[test]
    fn constant_image_has_no_features() {
        let g = GrayFrame::new(64, 64, alloc::vec![90; 64 * 64]).unwrap();
        let f = detect_features(&g, &MaskFrame::full(64, 64), &OrbParams::default(), &TestPattern::standard());
        assert!(f.is_empty());
    }

    #[test]
    fn square_corners_are_found() {
        let g = square_image();
        let feats = detect_features(&g, &make_mask(&g), &OrbParams::default(), &TestPattern::standard());
        assert!(feats.len() >= 4);
        for corner in [(20.0, 20.0), (44.0, 20.0), (20.0, 44.0), (44.0, 44.0)] {
            let best = feats
                .iter()
                .map(|f| libm::hypot(f.keypoint.x - corner.0, f.keypoint.y - corner.1))
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1.0, "corner {:?} nearest keypoint at {}", corner, best);
        }
    }

    #[test]
    fn detection_is_deterministic() {
        let g = square_image();
        let p = TestPattern::standard();
        let a = detect_features(&g, &make_mask(&g), &OrbParams::default(), &p);
        let b = detect_features(&g, &make_mask(&g), &OrbParams::default(), &p);
        assert_eq!(a, b);
    }

    #[test]
    fn pattern_is_fixed_and_inside_disk() {
        let a = TestPattern::standard();
        assert_eq!(a.pairs().len(), DESCRIPTOR_BITS);
        assert_eq!(a.pairs(), TestPattern::standard().pairs());
        for [p, q] in a.pairs() {
            assert!(p.0 * p.0 + p.1 * p.1 <= 169.0 && q.0 * q.0 + q.1 * q.1 <= 169.0);
        }
    }

    #[test]
    fn arc_detection() {
        assert!(arc_of_nine(0b1_1111_1111));
        assert!(!arc_of_nine(0b1111_1111));
        // wraps around the circle
        assert!(arc_of_nine(0b1111_0000_0000_0000 | 0b1_1111));
        assert!(!arc_of_nine(0b0101_0101_0101_0101));
    }
}
