use alloc::vec::Vec;

use crate::frame::GrayFrame;

/// Binary foreground mask with the dimensions of its source frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskFrame {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl MaskFrame {
    pub fn full(width: u32, height: u32) -> Self {
        Self { width, height, bits: alloc::vec![true; (width * height) as usize] }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Threshold maximizing the between-class variance of the 256-bin
/// histogram, searched exhaustively. Foreground is `gray >= threshold`.
/// Returns 0 (everything foreground) when no threshold separates two
/// non-empty classes.
pub fn otsu_threshold(g: &GrayFrame) -> u8 {
    let mut hist = [0u64; 256];
    for &v in g.gray() {
        hist[v as usize] += 1;
    }
    let total = g.gray().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();

    let (mut best_t, mut best_var) = (0u8, 0.0f64);
    let (mut below_n, mut below_sum) = (0.0f64, 0.0f64);
    for t in 1..256usize {
        below_n += hist[t - 1] as f64;
        below_sum += (t - 1) as f64 * hist[t - 1] as f64;
        let above_n = total - below_n;
        if below_n == 0.0 || above_n == 0.0 {
            continue;
        }
        let mu0 = below_sum / below_n;
        let mu1 = (sum_all - below_sum) / above_n;
        let var = below_n * above_n * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    best_t
}

pub fn make_mask(g: &GrayFrame) -> MaskFrame {
    let t = otsu_threshold(g);
    MaskFrame { width: g.width(), height: g.height(), bits: g.gray().iter().map(|&v| v >= t).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Between-class variance evaluated from scratch for one threshold.
    fn brute_variance(px: &[u8], t: u8) -> f64 {
        let (lo, hi): (Vec<f64>, Vec<f64>) = {
            let lo = px.iter().filter(|&&v| v < t).map(|&v| v as f64).collect();
            let hi = px.iter().filter(|&&v| v >= t).map(|&v| v as f64).collect();
            (lo, hi)
        };
        if lo.is_empty() || hi.is_empty() {
            return 0.0;
        }
        let n = px.len() as f64;
        let (w0, w1) = (lo.len() as f64 / n, hi.len() as f64 / n);
        let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
        let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
        w0 * w1 * (m0 - m1) * (m0 - m1)
    }

    #[test]
    fn bimodal_threshold_matches_exhaustive_oracle() {
        let px: Vec<u8> = (0..64).map(|i| if i % 2 == 0 { 40 } else { 200 }).collect();
        let g = GrayFrame::new(8, 8, px.clone()).unwrap();
        let t = otsu_threshold(&g);
        assert!(t > 40 && t <= 200);
        let best = (1..=255u8).map(|t| brute_variance(&px, t)).fold(0.0, f64::max);
        assert!((brute_variance(&px, t) - best).abs() < 1e-9);
        let m = make_mask(&g);
        for (v, b) in px.iter().zip(&m.bits) {
            assert_eq!(*b, *v == 200);
        }
    }

    #[test]
    fn constant_image_is_all_foreground() {
        let g = GrayFrame::new(5, 3, alloc::vec![77; 15]).unwrap();
        assert_eq!(make_mask(&g).count(), 15);
    }

    #[test]
    fn single_bright_pixel() {
        let mut px = alloc::vec![0u8; 25];
        px[12] = 255;
        let g = GrayFrame::new(5, 5, px.clone()).unwrap();
        let m = make_mask(&g);
        assert!(m.bits[12]);
        assert_eq!(m.count(), 1);
        let t = otsu_threshold(&g);
        let best = (1..=255u8).map(|t| brute_variance(&px, t)).fold(0.0, f64::max);
        assert!((brute_variance(&px, t) - best).abs() < 1e-12);
    }
}
