use alloc::vec::Vec;

use crate::conditioning::TimeSeries;
use crate::error::{Error, Result};
use crate::math::{nearest_index, solve_spd};
use crate::roi::Region;
use crate::thermal::ReadingKind;

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: x.len() });
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::UndefinedCorrelation);
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCell {
    pub region: Region,
    pub kind: ReadingKind,
    /// `None` when the correlation is undefined.
    pub r: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationTable {
    pub cells: Vec<CorrelationCell>,
}

impl CorrelationTable {
    pub fn get(&self, region: Region, kind: ReadingKind) -> Option<f64> {
        self.cells.iter().find(|c| c.region == region && c.kind == kind).and_then(|c| c.r)
    }

    /// Region with the highest defined r for a kind; earliest region wins
    /// ties.
    pub fn best_region(&self, kind: ReadingKind) -> Option<Region> {
        let mut best: Option<(Region, f64)> = None;
        for c in self.cells.iter().filter(|c| c.kind == kind) {
            if let Some(r) = c.r {
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((c.region, r));
                }
            }
        }
        best.map(|b| b.0)
    }
}

/// Correlates each region series with the room series resampled to the
/// region's timestamps by nearest neighbour. Undefined cells are kept as
/// `None`.
pub fn correlation_table(series: &[(Region, ReadingKind, TimeSeries)], room: &TimeSeries) -> Result<CorrelationTable> {
    if room.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let room_times = room.timestamps();
    let cells = series
        .iter()
        .map(|(region, kind, s)| {
            let x = s.values();
            let y: Vec<f64> = s
                .timestamps()
                .iter()
                .map(|&t| room.samples()[nearest_index(&room_times, t).expect("room is non-empty")].1)
                .collect();
            CorrelationCell { region: *region, kind: *kind, r: pearson(&x, &y).ok(), n: x.len() }
        })
        .collect();
    Ok(CorrelationTable { cells })
}

/// Least-squares polynomial in the abscissa mapped affinely onto [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Coefficients of `1, u, u^2, ...` in the normalized abscissa `u`.
    pub coefficients: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub fitted: Vec<f64>,
    pub residual_ss: f64,
}

impl PolyFit {
    pub fn normalize(&self, x: f64) -> f64 {
        2.0 * (x - self.x_min) / (self.x_max - self.x_min) - 1.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = self.normalize(x);
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }
}

/// Fits a polynomial of `degree` to `(x, y)` samples via normal equations.
pub fn polyfit_trend(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < degree + 1 {
        return Err(Error::TooFewSamples { needed: degree + 1, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature);
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < degree + 1 {
        return Err(Error::RankDeficient);
    }
    let (x_min, x_max) = (sorted[0], sorted[sorted.len() - 1]);
    let m = degree + 1;
    let mut fit = PolyFit { coefficients: Vec::new(), x_min, x_max, fitted: Vec::new(), residual_ss: 0.0 };
    if x_max == x_min {
        // degree 0 with a single distinct abscissa
        fit.x_max = x_min + 1.0;
    }
    let mut gram = alloc::vec![0.0; m * m];
    let mut rhs = alloc::vec![0.0; m];
    let mut powers = alloc::vec![0.0; m];
    for (&xi, &yi) in x.iter().zip(y) {
        let u = fit.normalize(xi);
        let mut p = 1.0;
        for slot in powers.iter_mut() {
            *slot = p;
            p *= u;
        }
        for a in 0..m {
            rhs[a] += powers[a] * yi;
            for b in 0..m {
                gram[a * m + b] += powers[a] * powers[b];
            }
        }
    }
    fit.coefficients = solve_spd(&gram, &rhs, m).ok_or(Error::RankDeficient)?;
    fit.fitted = x.iter().map(|&xi| fit.eval(xi)).collect();
    fit.residual_ss = fit.fitted.iter().zip(y).map(|(f, v)| (f - v) * (f - v)).sum();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::UndefinedCorrelation));
        assert_eq!(pearson(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::TooFewSamples { needed: 3, got: 2 }));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(Error::LengthMismatch(3, 2)));
    }

    #[test]
    fn table_identity_and_undefined() {
        let room = TimeSeries::new((0..10).map(|i| (i * 1000, 20.0 + i as f64 * 0.3)).collect()).unwrap();
        let flat = TimeSeries::new((0..10).map(|i| (i * 1000, 128.0)).collect()).unwrap();
        let t = correlation_table(
            &[(Region::Nose, ReadingKind::SkinTemperatureC, room.clone()), (Region::Nose, ReadingKind::PixelIntensity, flat)],
            &room,
        )
        .unwrap();
        assert!((t.get(Region::Nose, ReadingKind::SkinTemperatureC).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(t.get(Region::Nose, ReadingKind::PixelIntensity), None);
        assert_eq!(t.best_region(ReadingKind::SkinTemperatureC), Some(Region::Nose));
        assert_eq!(t.best_region(ReadingKind::PixelIntensity), None);
    }

    #[test]
    fn polyfit_constant_and_exact() {
        let x: Vec<f64> = (0..20).map(|i| 100.0 + 7.0 * i as f64).collect();
        let c = polyfit_trend(&x, &[4.5; 20], 6).unwrap();
        assert!((c.coefficients[0] - 4.5).abs() < 1e-9);
        assert!(c.coefficients[1..].iter().all(|v| v.abs() < 1e-9));

        let p = |u: f64| 1.0 - 2.0 * u + 0.5 * u * u * u - 3.0 * u.powi(6);
        let y: Vec<f64> = x.iter().map(|&v| p(2.0 * (v - 100.0) / 133.0 - 1.0)).collect();
        let f = polyfit_trend(&x, &y, 6).unwrap();
        for (a, b) in f.fitted.iter().zip(&y) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn polyfit_rank_deficient() {
        assert_eq!(polyfit_trend(&[1.0, 1.0, 2.0, 2.0], &[0.0, 1.0, 2.0, 3.0], 2), Err(Error::RankDeficient));
        assert!(matches!(polyfit_trend(&[1.0, 2.0], &[0.0, 1.0], 6), Err(Error::TooFewSamples { .. })));
    }
}
