//! Synthetic chamber sessions with known ground truth.
//!
//! A session integrates room and skin temperatures on the frame clock,
//! generates votes from a comfort band with hysteresis, and produces the
//! camera's view of every region (truth plus bias, noise and FFC steps).
//! [`scene`] turns a session into frame pairs.

pub mod scene;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::comfort::{Preference, Sensation, VoteRecord};
use crate::roi::Region;

pub use scene::{checkerboard_views, planted_homography, render_visual, Scene, ThermalRenderer};

/// Session clock origin (ms since the Unix epoch).
pub const BASE_EPOCH_MS: u64 = 1_610_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolId {
    Exp1,
    Exp2,
    Custom,
}

impl ProtocolId {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::Exp1 => "exp1",
            ProtocolId::Exp2 => "exp2",
            ProtocolId::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub id: ProtocolId,
    pub duration_s: u32,
    pub frame_interval_s: u32,
    pub vote_interval_s: u32,
    /// Piecewise-constant setpoint: `(start_s, °C)` sorted by start, the
    /// first starting at 0.
    pub setpoint: Vec<(u32, f64)>,
    /// Camera-to-face distance; sets the face scale in both images.
    pub distance_m: f64,
}

impl Protocol {
    /// 60 min at 5 s frames and 2 min votes. Holds 22 °C for ten minutes,
    /// then rises 1 °C every ten minutes to 27 °C.
    pub fn exp1() -> Self {
        Self {
            id: ProtocolId::Exp1,
            duration_s: 3600,
            frame_interval_s: 5,
            vote_interval_s: 120,
            setpoint: (0..6).map(|i| (i * 600, 22.0 + i as f64)).collect(),
            distance_m: 1.0,
        }
    }

    /// 90 min at 1 s frames and 3 min votes. Starts at 21 °C, +1 °C every
    /// 6 min up to 28 °C, then holds.
    pub fn exp2() -> Self {
        Self {
            id: ProtocolId::Exp2,
            duration_s: 5400,
            frame_interval_s: 1,
            vote_interval_s: 180,
            setpoint: (0..8).map(|i| (i * 360, 21.0 + i as f64)).collect(),
            distance_m: 3.0,
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "exp1" => Some(Self::exp1()),
            "exp2" => Some(Self::exp2()),
            _ => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.frame_interval_s > 0
            && self.vote_interval_s > 0
            && self.duration_s >= self.frame_interval_s
            && self.distance_m > 0.0
            && self.setpoint.first().is_some_and(|s| s.0 == 0)
            && self.setpoint.windows(2).all(|w| w[1].0 > w[0].0)
            && self.setpoint.iter().all(|s| s.1.is_finite())
    }

    pub fn setpoint_at(&self, t_s: f64) -> f64 {
        let mut v = self.setpoint[0].1;
        for &(start, temp) in &self.setpoint {
            if t_s >= start as f64 {
                v = temp;
            }
        }
        v
    }

    pub fn n_frames(&self) -> usize {
        (self.duration_s / self.frame_interval_s) as usize
    }

    /// Seconds from session start; the first frame is one interval in.
    pub fn frame_time_s(&self, k: usize) -> u32 {
        (k as u32 + 1) * self.frame_interval_s
    }

    pub fn vote_times_s(&self) -> Vec<u32> {
        (1..=self.duration_s / self.vote_interval_s).map(|m| m * self.vote_interval_s).collect()
    }
}

/// First-order response of one skin region to air temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionDynamics {
    /// Skin temperature at equilibrium with 22 °C air.
    pub baseline_c: f64,
    /// °C of skin per °C of air.
    pub gain: f64,
    pub tau_s: f64,
}

impl RegionDynamics {
    pub fn equilibrium(&self, air_c: f64) -> f64 {
        self.baseline_c + self.gain * (air_c - 22.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectModel {
    pub regions: BTreeMap<Region, RegionDynamics>,
    /// Skin outside the named regions.
    pub face: RegionDynamics,
    /// Preferred air range (°C).
    pub comfort_low: f64,
    pub comfort_high: f64,
    /// Distance beyond the band at which "slightly" becomes the full vote.
    pub strong_margin: f64,
    pub hysteresis: f64,
    pub seed: u64,
}

impl Default for SubjectModel {
    fn default() -> Self {
        let dyn_ = |baseline_c, gain, tau_s| RegionDynamics { baseline_c, gain, tau_s };
        let mut regions = BTreeMap::new();
        regions.insert(Region::Nose, dyn_(33.0, 0.6, 300.0));
        regions.insert(Region::RightCheek, dyn_(33.8, 0.45, 400.0));
        regions.insert(Region::LeftCheek, dyn_(33.9, 0.45, 400.0));
        regions.insert(Region::Forehead, dyn_(34.5, 0.3, 500.0));
        regions.insert(Region::RightEye, dyn_(34.8, 0.25, 500.0));
        regions.insert(Region::LeftEye, dyn_(34.8, 0.25, 500.0));
        Self {
            regions,
            face: dyn_(33.5, 0.4, 400.0),
            comfort_low: 22.5,
            comfort_high: 25.0,
            strong_margin: 1.5,
            hysteresis: 0.3,
            seed: 0,
        }
    }
}

impl SubjectModel {
    pub fn is_valid(&self) -> bool {
        let all = |d: &RegionDynamics| d.tau_s > 0.0 && d.gain.is_finite() && d.baseline_c.is_finite();
        Region::ALL.iter().all(|r| self.regions.get(r).is_some_and(all))
            && all(&self.face)
            && self.comfort_low < self.comfort_high
            && self.strong_margin > 0.0
            && self.hysteresis >= 0.0
    }

    /// 0 = Warmer .. 4 = Colder, holding `previous` while air stays within
    /// the hysteresis band of a threshold.
    fn preference_level(&self, air_c: f64, previous: Option<usize>) -> usize {
        let th = [self.comfort_low - self.strong_margin, self.comfort_low, self.comfort_high, self.comfort_high + self.strong_margin];
        let raw = th.iter().filter(|&&t| air_c > t).count();
        let Some(prev) = previous else { return raw };
        let lowest = th.iter().filter(|&&t| air_c > t + self.hysteresis).count();
        let highest = th.iter().filter(|&&t| air_c > t - self.hysteresis).count();
        prev.clamp(lowest, highest)
    }

    fn vote(&self, air_c: f64, level: usize) -> (Sensation, Preference) {
        let preference = [Preference::Warmer, Preference::SlightlyWarmer, Preference::NoChange, Preference::SlightlyCooler, Preference::Colder][level];
        let sensation = match level {
            0 if air_c < self.comfort_low - 2.0 * self.strong_margin => Sensation::Cold,
            0 => Sensation::Cool,
            1 => Sensation::SlightlyCool,
            2 => Sensation::Neutral,
            3 => Sensation::SlightlyWarm,
            _ if air_c > self.comfort_high + 2.0 * self.strong_margin => Sensation::Hot,
            _ => Sensation::Warm,
        };
        (sensation, preference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub bias_c: f64,
    pub noise_sigma_c: f64,
    pub ffc_period_s: u32,
    pub ffc_step_c: f64,
    /// Frames affected after each FFC event.
    pub ffc_frames: usize,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self { bias_c: 0.3, noise_sigma_c: 0.2, ffc_period_s: 180, ffc_step_c: 1.5, ffc_frames: 3 }
    }
}

impl CameraModel {
    /// No bias, noise or FFC artifacts.
    pub fn ideal() -> Self {
        Self { bias_c: 0.0, noise_sigma_c: 0.0, ffc_period_s: 180, ffc_step_c: 0.0, ffc_frames: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub subject: SubjectModel,
    pub camera: CameraModel,
    /// AR(1) room jitter standard deviation (°C).
    pub room_jitter_c: f64,
    /// Wearable logger noise (°C) and sampling period.
    pub wearable_sigma_c: f64,
    pub wearable_period_s: u32,
    pub seed: u64,
}

impl SimConfig {
    /// Root seed of every random stream in the session.
    pub fn session_seed(&self) -> u64 {
        self.seed ^ self.subject.seed.rotate_left(32)
    }

    pub fn new(protocol: Protocol, seed: u64) -> Self {
        Self {
            protocol,
            subject: SubjectModel::default(),
            camera: CameraModel::default(),
            room_jitter_c: 0.05,
            wearable_sigma_c: 0.1,
            wearable_period_s: 60,
            seed,
        }
    }
}

/// Noise-free temperatures seen by the camera in one frame, per scene
/// layer, and the per-pixel noise the renderer adds on top.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTemps {
    pub background: f64,
    pub face: f64,
    pub fiducial: f64,
    pub regions: BTreeMap<Region, f64>,
    pub noise_sigma_c: f64,
    pub noise_seed: u64,
}

pub const FIDUCIAL_C: f64 = 40.0;
pub const ROOM_LAG_S: f64 = 120.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimSession {
    pub config: SimConfig,
    pub frame_times_ms: Vec<u64>,
    pub setpoint: Vec<f64>,
    pub room: Vec<f64>,
    pub rh_pct: Vec<f64>,
    pub skin: BTreeMap<Region, Vec<f64>>,
    pub face_skin: Vec<f64>,
    /// Camera readings per region: truth + bias + noise + FFC.
    pub camera: BTreeMap<Region, Vec<f64>>,
    /// Additive FFC offset per frame (0 outside events).
    pub ffc_offset: Vec<f64>,
    pub ffc_events_ms: Vec<u64>,
    pub votes: Vec<VoteRecord>,
    pub wearable: Vec<(u64, f64)>,
}

pub(crate) fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Integrates one session. Panics if the protocol or subject is invalid.
pub fn simulate_session(cfg: &SimConfig) -> SimSession {
    let p = &cfg.protocol;
    let s = &cfg.subject;
    assert!(p.is_valid(), "invalid protocol");
    assert!(s.is_valid(), "invalid subject model");
    let seed = cfg.session_seed();
    let mut room_rng = rng_stream(seed, 1);
    let mut cam_rng = rng_stream(seed, 2);
    let mut wear_rng = rng_stream(seed, 3);

    let n = p.n_frames();
    let dt = p.frame_interval_s as f64;
    let frame_times_ms: Vec<u64> = (0..n).map(|k| BASE_EPOCH_MS + p.frame_time_s(k) as u64 * 1000).collect();

    // room: first-order lag towards the setpoint plus AR(1) jitter
    let phi = libm::exp(-dt / 60.0);
    let innovation = cfg.room_jitter_c * libm::sqrt(1.0 - phi * phi);
    let mut lagged = p.setpoint_at(0.0);
    let mut jitter = 0.0;
    let mut setpoint = Vec::with_capacity(n);
    let mut room = Vec::with_capacity(n);
    for k in 0..n {
        let sp = p.setpoint_at(p.frame_time_s(k) as f64);
        lagged += dt / ROOM_LAG_S * (sp - lagged);
        jitter = phi * jitter + innovation * normal(&mut room_rng);
        setpoint.push(sp);
        room.push(lagged + jitter);
    }
    let rh_pct = room.iter().map(|t| 45.0 - 1.5 * (t - 22.0)).collect();

    let integrate = |d: &RegionDynamics| -> Vec<f64> {
        let mut t = d.equilibrium(p.setpoint_at(0.0));
        room.iter()
            .map(|&air| {
                t += dt / d.tau_s * (d.equilibrium(air) - t);
                t
            })
            .collect()
    };
    let skin: BTreeMap<Region, Vec<f64>> = s.regions.iter().map(|(&r, d)| (r, integrate(d))).collect();
    let face_skin = integrate(&s.face);

    let c = &cfg.camera;
    let ffc_events_ms: Vec<u64> = match p.duration_s.checked_div(c.ffc_period_s) {
        None => Vec::new(),
        Some(last) => (1..=last).map(|m| BASE_EPOCH_MS + (m * c.ffc_period_s) as u64 * 1000).collect(),
    };
    let mut ffc_offset = alloc::vec![0.0; n];
    for &e in &ffc_events_ms {
        let first = frame_times_ms.partition_point(|&t| t < e);
        for o in ffc_offset.iter_mut().skip(first).take(c.ffc_frames) {
            *o = c.ffc_step_c;
        }
    }
    let mut observe = |truth: &[f64]| -> Vec<f64> {
        truth.iter().zip(&ffc_offset).map(|(t, f)| t + c.bias_c + c.noise_sigma_c * normal(&mut cam_rng) + f).collect()
    };
    let camera: BTreeMap<Region, Vec<f64>> = skin.iter().map(|(&r, v)| (r, observe(v))).collect();

    let mut votes = Vec::new();
    let mut level = None;
    for v in p.vote_times_s() {
        let t_ms = BASE_EPOCH_MS + v as u64 * 1000;
        let k = frame_times_ms.partition_point(|&t| t < t_ms).min(n - 1);
        let air = room[k];
        let l = s.preference_level(air, level);
        level = Some(l);
        let (sensation, preference) = s.vote(air, l);
        votes.push(VoteRecord { timestamp_ms: t_ms, sensation, preference });
    }

    let forehead = &skin[&Region::Forehead];
    let wearable = match p.duration_s.checked_div(cfg.wearable_period_s) {
        None => Vec::new(),
        Some(last) => (1..=last)
            .map(|m| {
                let t_ms = BASE_EPOCH_MS + (m * cfg.wearable_period_s) as u64 * 1000;
                let k = frame_times_ms.partition_point(|&t| t < t_ms).min(n - 1);
                (t_ms, forehead[k] + cfg.wearable_sigma_c * normal(&mut wear_rng))
            })
            .collect()
    };

    SimSession {
        config: cfg.clone(),
        frame_times_ms,
        setpoint,
        room,
        rh_pct,
        skin,
        face_skin,
        camera,
        ffc_offset,
        ffc_events_ms,
        votes,
        wearable,
    }
}

impl SimSession {
    pub fn n_frames(&self) -> usize {
        self.frame_times_ms.len()
    }

    /// Frame `k` for rendering: truth + bias + FFC per layer, with the
    /// camera noise drawn per pixel by the renderer.
    pub fn layer_temps(&self, k: usize) -> LayerTemps {
        let c = &self.config.camera;
        let offset = c.bias_c + self.ffc_offset[k];
        LayerTemps {
            background: self.room[k] + offset,
            face: self.face_skin[k] + offset,
            fiducial: FIDUCIAL_C + offset,
            regions: self.skin.iter().map(|(&r, v)| (r, v[k] + offset)).collect(),
            noise_sigma_c: c.noise_sigma_c,
            noise_seed: self.config.session_seed() ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        }
    }

    /// The camera reading without noise or FFC: truth plus bias.
    pub fn clean_camera(&self, region: Region) -> Vec<f64> {
        self.skin[&region].iter().map(|t| t + self.config.camera.bias_c).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_anchors() {
        let p = Protocol::exp2();
        assert_eq!(p.n_frames(), 5400);
        assert_eq!(p.setpoint_at(0.0), 21.0);
        assert_eq!(p.setpoint_at(359.0), 21.0);
        assert_eq!(p.setpoint_at(360.0), 22.0);
        assert_eq!(p.setpoint_at(5400.0), 28.0);
        assert_eq!(p.vote_times_s().len(), 30);
        let e1 = Protocol::exp1();
        assert_eq!(e1.n_frames(), 720);
        assert_eq!(e1.setpoint_at(0.0), 22.0);
        assert_eq!(e1.vote_times_s().len(), 30);
    }

    #[test]
    fn ideal_camera_equals_truth() {
        let mut cfg = SimConfig::new(Protocol::exp1(), 5);
        cfg.camera = CameraModel::ideal();
        let s = simulate_session(&cfg);
        assert_eq!(s.camera[&Region::Nose], s.skin[&Region::Nose]);
    }

    #[test]
    fn ffc_steps_three_frames_per_period() {
        let mut cfg = SimConfig::new(Protocol::exp2(), 1);
        cfg.camera.noise_sigma_c = 0.0;
        let s = simulate_session(&cfg);
        let hit = s.ffc_offset.iter().filter(|&&o| o != 0.0).count();
        assert_eq!(hit, 3 * 29 + 1); // the final event falls on the last frame
        assert_eq!(s.ffc_offset[179], 1.5);
        assert_eq!(s.ffc_offset[178], 0.0);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = simulate_session(&SimConfig::new(Protocol::exp1(), 11));
        let b = simulate_session(&SimConfig::new(Protocol::exp1(), 11));
        let c = simulate_session(&SimConfig::new(Protocol::exp1(), 12));
        assert_eq!(a, b);
        assert_ne!(a.camera, c.camera);
    }

    #[test]
    fn hysteresis_holds_level() {
        let s = SubjectModel::default();
        assert_eq!(s.preference_level(22.6, None), 2);
        assert_eq!(s.preference_level(22.6, Some(1)), 1);
        assert_eq!(s.preference_level(22.9, Some(1)), 2);
        assert_eq!(s.preference_level(30.0, Some(0)), 4);
    }

    #[test]
    fn exp2_produces_four_preference_classes() {
        use crate::comfort::{map_preference, Scheme};
        let s = simulate_session(&SimConfig::new(Protocol::exp2(), 7));
        let mut labels: Vec<_> = s.votes.iter().map(|v| map_preference(v.preference, Scheme::FourClass)).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 4);
    }
}
