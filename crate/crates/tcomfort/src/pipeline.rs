//! Per-frame registration and ROI extraction over a session.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use tcomfort_core::register::{downscale_factor, prepare_visual, register_with_prior, OrbParams, PreparedImage, RegistrationParams, TestPattern};
use tcomfort_core::roi::{compute_rois, transfer_rois, LandmarkProvider, RoiOptions};
use tcomfort_core::thermal::{agc_to_8bit, RoiReading, ThermalReader};
use tcomfort_core::{ReadingKind, RigCalibration, Statistic, ThermalFrame};

use crate::error::{CliError, Result};
use crate::formats::RegistrationRecord;
use crate::manifest::Session;
use crate::pnm::{load_thermal_frame, load_visual_frame};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    pub seed: u64,
    pub include_eyes: bool,
    pub statistic: Statistic,
    /// `None` reads every kind the frame supports.
    pub kind: Option<ReadingKind>,
}

/// Everything produced for one frame pair. Warnings are frame-level
/// conditions that leave gaps rather than abort the run.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub registration: RegistrationRecord,
    pub readings: Vec<RoiReading>,
    pub warnings: Vec<String>,
}

/// Registration seed of the frame at `index` in timestamp order.
pub fn frame_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Registers one thermal frame against its prepared visual view and reads
/// the facial regions when landmarks are available. `landmarks` is `None`
/// for registration only.
#[allow(clippy::too_many_arguments)]
pub fn process_frame(
    frame_id: u64,
    thermal: &ThermalFrame,
    visual: &PreparedImage,
    factor: u32,
    prior: Option<&RigCalibration>,
    landmarks: Option<&dyn LandmarkProvider>,
    opts: &ExtractOptions,
    index: usize,
) -> Result<FrameOutcome> {
    let params = RegistrationParams::with_seed(frame_seed(opts.seed, index));
    let gray = PreparedImage::new(agc_to_8bit(thermal), &params.orb, &TestPattern::standard());
    let result = register_with_prior(visual, factor, &gray, prior, &params)?;
    let registration = RegistrationRecord { frame_id, result };
    let mut outcome = FrameOutcome { registration, readings: Vec::new(), warnings: Vec::new() };
    let Some(provider) = landmarks else { return Ok(outcome) };
    let Some(lm) = provider.landmarks(frame_id)? else {
        outcome.warnings.push("no landmarks".into());
        return Ok(outcome);
    };
    let bounds = (visual.gray.width() as f64 * factor as f64, visual.gray.height() as f64 * factor as f64);
    let visual_rois = match compute_rois(&lm, &RoiOptions::new(opts.include_eyes, Some(bounds))) {
        Ok(r) => r,
        Err(e) => {
            outcome.warnings.push(e.to_string());
            return Ok(outcome);
        }
    };
    let (rois, dropped) = match transfer_rois(&visual_rois, &result.homography, thermal.width(), thermal.height()) {
        Ok(r) => r,
        Err(e) => {
            outcome.warnings.push(e.to_string());
            return Ok(outcome);
        }
    };
    outcome.warnings.extend(dropped.iter().map(|d| format!("{} dropped (area {:.2} px²)", d.region.name(), d.area)));
    let kinds: Vec<ReadingKind> = match opts.kind {
        Some(k) => vec![k],
        None if thermal.radiometric() => vec![ReadingKind::SkinTemperatureC, ReadingKind::PixelIntensity],
        None => vec![ReadingKind::PixelIntensity],
    };
    let mut reader = ThermalReader::new(thermal);
    for kind in kinds {
        for (&region, rect) in &rois.regions {
            match reader.statistic(region, rect, kind, opts.statistic) {
                Ok(r) => outcome.readings.push(r),
                Err(tcomfort_core::Error::RoiTooSmall) => outcome.warnings.push(format!("{} too small", region.name())),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(outcome)
}

/// Runs `process_frame` over every pair of a session with up to `jobs`
/// workers. Results come back in timestamp order whatever the completion
/// order; each frame's seed depends only on its index.
pub fn process_session(
    session: &Session,
    prior: Option<&RigCalibration>,
    landmarks: Option<&(dyn LandmarkProvider + Sync)>,
    opts: &ExtractOptions,
    jobs: usize,
) -> Result<Vec<FrameOutcome>> {
    let orb = OrbParams::default();
    let pattern = TestPattern::standard();
    // static rigs list one visual file for every frame; prepare it once
    let mut visuals: BTreeMap<&PathBuf, (PreparedImage, u32)> = BTreeMap::new();
    let first = session.pairs.first().ok_or_else(|| CliError::Session("empty session".into()))?;
    let probe = load_thermal_frame(&first.thermal)?;
    for pair in &session.pairs {
        if !visuals.contains_key(&pair.visual) {
            let v = load_visual_frame(&pair.visual)?;
            let factor = downscale_factor(v.width(), v.height(), probe.width(), probe.height())?;
            visuals.insert(&pair.visual, (prepare_visual(&v, factor, &orb, &pattern)?, factor));
        }
    }

    let n = session.pairs.len();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<FrameOutcome>>>> = Mutex::new((0..n).map(|_| None).collect());
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= n {
            break;
        }
        let pair = &session.pairs[i];
        let (visual, factor) = &visuals[&pair.visual];
        let out = load_thermal_frame(&pair.thermal).and_then(|t| {
            let t = t.with_timestamp(pair.thermal_ms);
            process_frame(pair.thermal_ms, &t, visual, *factor, prior, landmarks.map(|l| l as &dyn LandmarkProvider), opts, i)
        });
        let failed = out.is_err();
        results.lock().expect("worker panicked")[i] = Some(out);
        if failed {
            // stop handing out work; earlier frames still finish
            next.store(n, Ordering::Relaxed);
        }
    };
    std::thread::scope(|s| {
        for _ in 1..jobs.max(1) {
            s.spawn(work);
        }
        work();
    });
    results.into_inner().expect("worker panicked").into_iter().map_while(|r| r).collect()
}
