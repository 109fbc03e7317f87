//! Writes a simulated session directory in the formats the pipeline reads.
//!
//! ```text
//! manifest.txt  visual.ppm  thermal/00000.pgm ...
//! landmarks.txt votes.csv room.csv wearable.csv
//! calibration/view_00.txt ...
//! truth/homography.txt truth/skin.csv truth/artifacts.txt
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tcomfort_core::sim::{checkerboard_views, render_visual, simulate_session, Scene, SimConfig, SimSession, ThermalRenderer, BASE_EPOCH_MS};
use tcomfort_core::Region;

use crate::error::{write_file, CliError, Result};
use crate::formats::{self, data_lines, RoomSample};
use crate::manifest::SessionManifest;
use crate::pnm::{save_thermal_frame, save_visual_frame};

pub const CALIBRATION_VIEWS: usize = 10;
/// Corner noise of the simulated checkerboard detections, thermal px.
pub const CALIBRATION_NOISE_PX: f64 = 0.3;

/// Applies `key=value` overrides to a simulator configuration.
///
/// Subject keys: `comfort_low`, `comfort_high`, `strong_margin`,
/// `hysteresis`, `subject_seed`, `<region>.baseline_c|gain|tau_s` and
/// `face.*`. Camera keys: `camera.bias_c`, `camera.noise_sigma_c`,
/// `camera.ffc_period_s`, `camera.ffc_step_c`, `camera.ffc_frames`.
/// Logging keys: `room_jitter_c`, `wearable_sigma_c`, `wearable_period_s`.
pub fn apply_overrides(cfg: &mut SimConfig, text: &str, path: &Path) -> Result<()> {
    for (n, line) in data_lines(text) {
        let bad = |m: String| CliError::format(path, n, m);
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let num = || value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(format!("bad number {value:?} for {key}")));
        let int = || value.parse::<u64>().map_err(|_| bad(format!("bad integer {value:?} for {key}")));
        let s = &mut cfg.subject;
        let c = &mut cfg.camera;
        match key {
            "comfort_low" => s.comfort_low = num()?,
            "comfort_high" => s.comfort_high = num()?,
            "strong_margin" => s.strong_margin = num()?,
            "hysteresis" => s.hysteresis = num()?,
            "subject_seed" => s.seed = int()?,
            "camera.bias_c" => c.bias_c = num()?,
            "camera.noise_sigma_c" => c.noise_sigma_c = num()?,
            "camera.ffc_period_s" => c.ffc_period_s = int()? as u32,
            "camera.ffc_step_c" => c.ffc_step_c = num()?,
            "camera.ffc_frames" => c.ffc_frames = int()? as usize,
            "room_jitter_c" => cfg.room_jitter_c = num()?,
            "wearable_sigma_c" => cfg.wearable_sigma_c = num()?,
            "wearable_period_s" => cfg.wearable_period_s = int()? as u32,
            _ => {
                let (target, field) = key.split_once('.').ok_or_else(|| bad(format!("unknown key {key}")))?;
                let d = match target {
                    "face" => &mut s.face,
                    r => {
                        let region = Region::from_name(r).ok_or_else(|| bad(format!("unknown key {key}")))?;
                        s.regions.get_mut(&region).expect("default subject has every region")
                    }
                };
                match field {
                    "baseline_c" => d.baseline_c = num()?,
                    "gain" => d.gain = num()?,
                    "tau_s" => d.tau_s = num()?,
                    _ => return Err(bad(format!("unknown key {key}"))),
                }
            }
        }
    }
    if !cfg.subject.is_valid() {
        return Err(CliError::format(path, 0, "subject model is invalid"));
    }
    if !(cfg.camera.noise_sigma_c >= 0.0 && cfg.room_jitter_c >= 0.0 && cfg.wearable_sigma_c >= 0.0) {
        return Err(CliError::format(path, 0, "noise levels must be non-negative"));
    }
    Ok(())
}

/// Simulates one session and writes it under `out`. `header` is the
/// provenance block prepended to every text file.
pub fn write_session(cfg: &SimConfig, out: &Path, header: &str) -> Result<SimSession> {
    let s = simulate_session(cfg);
    let scene = Scene::new(cfg.protocol.distance_m, cfg.seed);
    let renderer = ThermalRenderer::new(&scene)?;

    let visual_rel = PathBuf::from("visual.ppm");
    save_visual_frame(&out.join(&visual_rel), &render_visual(&scene, BASE_EPOCH_MS))?;
    let mut thermal = Vec::with_capacity(s.n_frames());
    for (k, &t) in s.frame_times_ms.iter().enumerate() {
        let rel = PathBuf::from(format!("thermal/{k:05}.pgm"));
        save_thermal_frame(&out.join(&rel), &renderer.render(&s.layer_temps(k), t))?;
        thermal.push((t, rel));
    }
    let visual = s.frame_times_ms.iter().map(|&t| (t, visual_rel.clone())).collect();

    let landmarks = s.frame_times_ms.iter().map(|&t| (t, scene.landmarks.clone())).collect();
    write_file(&out.join("landmarks.txt"), formats::landmarks_to_text(&landmarks, header).as_bytes())?;
    write_file(&out.join("votes.csv"), formats::votes_to_text(&s.votes, header).as_bytes())?;
    let room: Vec<RoomSample> =
        s.frame_times_ms.iter().zip(&s.room).zip(&s.rh_pct).map(|((&timestamp_ms, &temp_c), &rh_pct)| RoomSample { timestamp_ms, temp_c, rh_pct }).collect();
    write_file(&out.join("room.csv"), formats::room_to_text(&room, header).as_bytes())?;
    let wearable = (!s.wearable.is_empty()).then(|| PathBuf::from("wearable.csv"));
    if wearable.is_some() {
        write_file(&out.join("wearable.csv"), formats::wearable_to_text(&s.wearable, header).as_bytes())?;
    }

    for (i, view) in checkerboard_views(&scene.planted, CALIBRATION_VIEWS, CALIBRATION_NOISE_PX, cfg.seed).iter().enumerate() {
        write_file(&out.join(format!("calibration/view_{i:02}.txt")), formats::correspondences_to_text(view, header).as_bytes())?;
    }
    write_truth(&s, &scene, out, header)?;

    let manifest = SessionManifest {
        session_id: format!("sim-{}-{}", cfg.protocol.id.name(), cfg.seed),
        protocol_id: cfg.protocol.id.name().to_string(),
        camera_distance_m: cfg.protocol.distance_m,
        landmarks: "landmarks.txt".into(),
        votes: "votes.csv".into(),
        room: "room.csv".into(),
        wearable,
        thermal,
        visual,
    };
    write_file(&out.join("manifest.txt"), format!("{header}{}", manifest.to_text()).as_bytes())?;
    Ok(s)
}

fn write_truth(s: &SimSession, scene: &Scene, out: &Path, header: &str) -> Result<()> {
    let h: Vec<String> = scene.planted.to_array().iter().map(f64::to_string).collect();
    write_file(&out.join("truth/homography.txt"), format!("{header}h={}\n", h.join(" ")).as_bytes())?;

    let regions: Vec<Region> = s.skin.keys().copied().collect();
    let mut skin = String::from(header);
    let names: Vec<&str> = regions.iter().map(|r| r.name()).collect();
    writeln!(skin, "timestamp_ms,{},face", names.join(",")).unwrap();
    for (k, t) in s.frame_times_ms.iter().enumerate() {
        write!(skin, "{t}").unwrap();
        for r in &regions {
            write!(skin, ",{}", s.skin[r][k]).unwrap();
        }
        writeln!(skin, ",{}", s.face_skin[k]).unwrap();
    }
    write_file(&out.join("truth/skin.csv"), skin.as_bytes())?;

    let c = &s.config.camera;
    let mut a = String::from(header);
    writeln!(a, "bias_c={}", c.bias_c).unwrap();
    writeln!(a, "noise_sigma_c={}", c.noise_sigma_c).unwrap();
    writeln!(a, "ffc_step_c={}", c.ffc_step_c).unwrap();
    writeln!(a, "ffc_frames={}", c.ffc_frames).unwrap();
    let events: Vec<String> = s.ffc_events_ms.iter().map(u64::to_string).collect();
    writeln!(a, "ffc_events_ms={}", events.join(" ")).unwrap();
    writeln!(a, "session_seed={}", s.config.session_seed()).unwrap();
    write_file(&out.join("truth/artifacts.txt"), a.as_bytes())
}
