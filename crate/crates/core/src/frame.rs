//! Frame containers shared by every pipeline stage.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Lepton 3.5 sensor geometry.
pub const THERMAL_WIDTH: u32 = 160;
pub const THERMAL_HEIGHT: u32 = 120;
/// Logitech C922 capture geometry used for the visual stream.
pub const VISUAL_WIDTH: u32 = 1280;
pub const VISUAL_HEIGHT: u32 = 960;

/// Single-channel 16-bit thermal capture.
///
/// Radiometric frames store centikelvin counts; non-radiometric frames
/// carry uncalibrated counts that only have relative meaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThermalFrame {
    width: u32,
    height: u32,
    raw: Vec<u16>,
    timestamp_ms: u64,
    radiometric: bool,
}

impl ThermalFrame {
    pub fn new(width: u32, height: u32, raw: Vec<u16>, timestamp_ms: u64, radiometric: bool) -> Result<Self> {
        check_dims(width, height, raw.len(), 1)?;
        Ok(Self { width, height, raw, timestamp_ms, radiometric })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn raw(&self) -> &[u16] {
        &self.raw
    }

    pub fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }

    pub fn radiometric(&self) -> bool {
        self.radiometric
    }

    pub fn at(&self, x: u32, y: u32) -> u16 {
        self.raw[(y * self.width + x) as usize]
    }

    pub fn with_timestamp(mut self, timestamp_ms: u64) -> Self {
        self.timestamp_ms = timestamp_ms;
        self
    }
}

/// Three-channel 8-bit capture, row-major RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisualFrame {
    width: u32,
    height: u32,
    rgb: Vec<u8>,
    timestamp_ms: u64,
}

impl VisualFrame {
    pub fn new(width: u32, height: u32, rgb: Vec<u8>, timestamp_ms: u64) -> Result<Self> {
        check_dims(width, height, rgb.len(), 3)?;
        Ok(Self { width, height, rgb, timestamp_ms })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn rgb(&self) -> &[u8] {
        &self.rgb
    }

    pub fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }

    pub fn with_timestamp(mut self, timestamp_ms: u64) -> Self {
        self.timestamp_ms = timestamp_ms;
        self
    }
}

/// Single-channel 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    gray: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, gray: Vec<u8>) -> Result<Self> {
        check_dims(width, height, gray.len(), 1)?;
        Ok(Self { width, height, gray })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn gray(&self) -> &[u8] {
        &self.gray
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> u8 {
        self.gray[(y * self.width + x) as usize]
    }
}

fn check_dims(width: u32, height: u32, len: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidFrame("width and height must be at least 1"));
    }
    if len != width as usize * height as usize * channels {
        return Err(Error::InvalidFrame("pixel buffer length does not match dimensions"));
    }
    Ok(())
}

/// Luma conversion with the Rec. 601 weights, rounded half up.
pub fn to_grayscale(frame: &VisualFrame) -> GrayFrame {
    let gray = frame
        .rgb
        .chunks_exact(3)
        .map(|px| {
            let weighted = 299 * px[0] as u32 + 587 * px[1] as u32 + 114 * px[2] as u32;
            ((weighted + 500) / 1000).min(255) as u8
        })
        .collect();
    GrayFrame { width: frame.width, height: frame.height, gray }
}

/// Area-averaging downscale by an integer factor. Dimensions must be
/// exact multiples of `factor`.
pub fn downscale_area(frame: &GrayFrame, factor: u32) -> Result<GrayFrame> {
    if factor == 0 || !frame.width.is_multiple_of(factor) || !frame.height.is_multiple_of(factor) {
        return Err(Error::InvalidParameter("downscale factor must divide both frame dimensions"));
    }
    let (w, h) = (frame.width / factor, frame.height / factor);
    let n = factor * factor;
    let mut sums = alloc::vec![0u32; (w * h) as usize];
    for y in 0..frame.height {
        let row = &frame.gray[(y * frame.width) as usize..((y + 1) * frame.width) as usize];
        let out_row = ((y / factor) * w) as usize;
        for (x, &v) in row.iter().enumerate() {
            sums[out_row + x / factor as usize] += v as u32;
        }
    }
    let gray = sums.into_iter().map(|s| ((s + n / 2) / n) as u8).collect();
    Ok(GrayFrame { width: w, height: h, gray })
}
