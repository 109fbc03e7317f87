//! Radiometric conversion, 8-bit AGC rendering, and ROI statistics.
//!
//! Radiometric raw counts are centikelvin: `T[°C] = raw / 100 - 273.15`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::{GrayFrame, ThermalFrame};
use crate::math::percentile_nearest_rank;
use crate::roi::{Rect, Region};

/// Hard plausibility band for skin and air readings.
pub const MIN_PLAUSIBLE_C: f64 = -40.0;
pub const MAX_PLAUSIBLE_C: f64 = 80.0;

/// Degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(pub f64);

impl Temperature {
    pub fn celsius(self) -> f64 {
        self.0
    }
}

pub fn raw_to_celsius(raw: u16) -> Result<Temperature> {
    let c = raw as f64 / 100.0 - 273.15;
    if (MIN_PLAUSIBLE_C..=MAX_PLAUSIBLE_C).contains(&c) {
        Ok(Temperature(c))
    } else {
        Err(Error::ImplausibleRadiometric(raw))
    }
}

/// Inverse of [`raw_to_celsius`], rounded to the nearest count.
pub fn celsius_to_raw(c: f64) -> u16 {
    libm::round((c + 273.15) * 100.0).clamp(0.0, u16::MAX as f64) as u16
}

/// Per-frame min-max normalization to 8 bits, rounded half up. A constant
/// frame maps to all zeros.
pub fn agc_to_8bit(t: &ThermalFrame) -> GrayFrame {
    let raw = t.raw();
    let lo = raw.iter().copied().min().unwrap_or(0) as u64;
    let hi = raw.iter().copied().max().unwrap_or(0) as u64;
    let span = hi - lo;
    let gray: Vec<u8> = if span == 0 {
        alloc::vec![0; raw.len()]
    } else {
        raw.iter().map(|&v| ((510 * (v as u64 - lo) + span) / (2 * span)) as u8).collect()
    };
    GrayFrame::new(t.width(), t.height(), gray).expect("dimensions come from a valid frame")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReadingKind {
    SkinTemperatureC,
    PixelIntensity,
}

impl ReadingKind {
    pub fn name(self) -> &'static str {
        match self {
            ReadingKind::SkinTemperatureC => "skin_temperature_C",
            ReadingKind::PixelIntensity => "pixel_intensity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "skin_temperature_C" => Some(ReadingKind::SkinTemperatureC),
            "pixel_intensity" => Some(ReadingKind::PixelIntensity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Statistic {
    #[default]
    Mean,
    Max,
    P90,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Max => "max",
            Statistic::P90 => "p90",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "mean" => Some(Statistic::Mean),
            "max" => Some(Statistic::Max),
            "p90" => Some(Statistic::P90),
            _ => None,
        }
    }

    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Statistic::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Statistic::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Statistic::P90 => percentile_nearest_rank(values, 90.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiReading {
    pub timestamp_ms: u64,
    pub region: Region,
    pub kind: ReadingKind,
    /// °C for skin readings, 8-bit level for intensities.
    pub value: f64,
    pub n_pixels: usize,
}

/// Minimum ROI size in whole thermal pixels.
pub const MIN_ROI_PIXELS: usize = 4;

/// Reads ROI statistics from one thermal frame; the AGC rendering is
/// computed once on first use.
pub struct ThermalReader<'a> {
    frame: &'a ThermalFrame,
    agc: Option<GrayFrame>,
}

impl<'a> ThermalReader<'a> {
    pub fn new(frame: &'a ThermalFrame) -> Self {
        Self { frame, agc: None }
    }

    /// `rect` is a whole-pixel rectangle in thermal coordinates.
    pub fn statistic(&mut self, region: Region, rect: &Rect, kind: ReadingKind, stat: Statistic) -> Result<RoiReading> {
        let (w, h) = (self.frame.width() as i64, self.frame.height() as i64);
        let x0 = (libm::floor(rect.x0) as i64).clamp(0, w);
        let y0 = (libm::floor(rect.y0) as i64).clamp(0, h);
        let x1 = (libm::ceil(rect.x1) as i64).clamp(0, w);
        let y1 = (libm::ceil(rect.y1) as i64).clamp(0, h);
        let n = ((x1 - x0).max(0) * (y1 - y0).max(0)) as usize;
        if n < MIN_ROI_PIXELS {
            return Err(Error::RoiTooSmall);
        }
        let mut values = Vec::with_capacity(n);
        match kind {
            ReadingKind::SkinTemperatureC => {
                if !self.frame.radiometric() {
                    return Err(Error::KindMismatch);
                }
                for y in y0..y1 {
                    for x in x0..x1 {
                        values.push(raw_to_celsius(self.frame.at(x as u32, y as u32))?.celsius());
                    }
                }
            }
            ReadingKind::PixelIntensity => {
                let agc = self.agc.get_or_insert_with(|| agc_to_8bit(self.frame));
                for y in y0..y1 {
                    for x in x0..x1 {
                        values.push(agc.at(x as u32, y as u32) as f64);
                    }
                }
            }
        }
        Ok(RoiReading { timestamp_ms: self.frame.timestamp_ms(), region, kind, value: stat.apply(&values), n_pixels: n })
    }
}

pub fn roi_statistic(frame: &ThermalFrame, region: Region, rect: &Rect, kind: ReadingKind, stat: Statistic) -> Result<RoiReading> {
    ThermalReader::new(frame).statistic(region, rect, kind, stat)
}
