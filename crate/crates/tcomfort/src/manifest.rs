//! Session manifests.
//!
//! ```text
//! # comments and blank lines are ignored
//! session_id=sim-exp1-7
//! protocol_id=exp1
//! camera_distance_m=1
//! landmarks=landmarks.txt
//! votes=votes.csv
//! room=room.csv
//! wearable=wearable.csv
//! thermal 1610000005000 thermal/000000.pgm
//! visual 1610000005000 visual.ppm
//! ```
//!
//! Relative paths resolve against the manifest's directory. The
//! timestamp on each frame line is authoritative; a static visual view
//! may be listed once per thermal frame with the same path.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{read_text, CliError, Result};

/// Maximum thermal/visual timestamp difference for a pair.
pub const PAIRING_TOLERANCE_MS: u64 = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionManifest {
    pub session_id: String,
    pub protocol_id: String,
    pub camera_distance_m: f64,
    pub landmarks: PathBuf,
    pub votes: PathBuf,
    pub room: PathBuf,
    pub wearable: Option<PathBuf>,
    pub thermal: Vec<(u64, PathBuf)>,
    pub visual: Vec<(u64, PathBuf)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePair {
    pub thermal_ms: u64,
    pub visual_ms: u64,
    pub thermal: PathBuf,
    pub visual: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    /// Paths already resolved against the manifest directory.
    pub manifest: SessionManifest,
    /// Sorted by thermal timestamp.
    pub pairs: Vec<FramePair>,
}

impl SessionManifest {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut kv = std::collections::BTreeMap::new();
        let mut thermal = Vec::new();
        let mut visual = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| CliError::format(path, i + 1, m.to_string());
            if let Some((key, value)) = line.split_once('=') {
                if kv.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
                    return Err(bad(&format!("duplicate key {}", key.trim())));
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(tag), Some(ts), Some(p), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected `key=value` or `thermal|visual <timestamp_ms> <path>`"));
            };
            let ts: u64 = ts.parse().map_err(|_| bad("bad timestamp"))?;
            match tag {
                "thermal" => thermal.push((ts, PathBuf::from(p))),
                "visual" => visual.push((ts, PathBuf::from(p))),
                _ => return Err(bad(&format!("unknown frame tag {tag}"))),
            }
        }
        let mut take = |key: &str| kv.remove(key).ok_or_else(|| CliError::format(path, 0, format!("missing key {key}")));
        let camera_distance_m: f64 = {
            let v = take("camera_distance_m")?;
            v.parse().ok().filter(|d: &f64| d.is_finite() && *d > 0.0).ok_or_else(|| CliError::format(path, 0, format!("bad camera_distance_m {v}")))?
        };
        let manifest = SessionManifest {
            session_id: take("session_id")?,
            protocol_id: take("protocol_id")?,
            camera_distance_m,
            landmarks: take("landmarks")?.into(),
            votes: take("votes")?.into(),
            room: take("room")?.into(),
            wearable: kv.remove("wearable").map(PathBuf::from),
            thermal,
            visual,
        };
        if let Some(key) = kv.keys().next() {
            return Err(CliError::format(path, 0, format!("unknown key {key}")));
        }
        Ok(manifest)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "session_id={}", self.session_id).unwrap();
        writeln!(s, "protocol_id={}", self.protocol_id).unwrap();
        writeln!(s, "camera_distance_m={}", self.camera_distance_m).unwrap();
        writeln!(s, "landmarks={}", self.landmarks.display()).unwrap();
        writeln!(s, "votes={}", self.votes.display()).unwrap();
        writeln!(s, "room={}", self.room.display()).unwrap();
        if let Some(w) = &self.wearable {
            writeln!(s, "wearable={}", w.display()).unwrap();
        }
        for (t, p) in &self.thermal {
            writeln!(s, "thermal {t} {}", p.display()).unwrap();
        }
        for (t, p) in &self.visual {
            writeln!(s, "visual {t} {}", p.display()).unwrap();
        }
        s
    }

    fn resolve(mut self, base: &Path) -> Self {
        let r = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        r(&mut self.landmarks);
        r(&mut self.votes);
        r(&mut self.room);
        if let Some(w) = self.wearable.as_mut() {
            r(w);
        }
        self.thermal.iter_mut().chain(self.visual.iter_mut()).for_each(|(_, p)| r(p));
        self
    }
}

/// Pairs sorted thermal and visual frames one to one by timestamp.
pub fn pair_frames(thermal: &[(u64, PathBuf)], visual: &[(u64, PathBuf)]) -> Result<Vec<FramePair>> {
    if thermal.is_empty() && visual.is_empty() {
        return Err(CliError::Session("empty session".into()));
    }
    let mut t = thermal.to_vec();
    let mut v = visual.to_vec();
    t.sort_by_key(|f| f.0);
    v.sort_by_key(|f| f.0);
    for (list, name) in [(&t, "thermal"), (&v, "visual")] {
        if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(CliError::Session(format!("duplicate {name} timestamp {}", w[0].0)));
        }
    }
    let orphan = |name: &str, ts: u64| CliError::Session(format!("unpaired {name} frame at {ts} ms (tolerance {PAIRING_TOLERANCE_MS} ms)"));
    let nearest = |list: &[(u64, PathBuf)], ts: u64| -> Option<usize> {
        let i = list.partition_point(|f| f.0 < ts);
        [i.checked_sub(1), (i < list.len()).then_some(i)].into_iter().flatten().min_by_key(|&j| list[j].0.abs_diff(ts))
    };
    let mut pairs = Vec::with_capacity(t.len());
    let mut used = vec![false; v.len()];
    for (ts, path) in &t {
        let j = nearest(&v, *ts).filter(|&j| v[j].0.abs_diff(*ts) <= PAIRING_TOLERANCE_MS).ok_or_else(|| orphan("thermal", *ts))?;
        if used[j] {
            return Err(orphan("thermal", *ts));
        }
        used[j] = true;
        pairs.push(FramePair { thermal_ms: *ts, visual_ms: v[j].0, thermal: path.clone(), visual: v[j].1.clone() });
    }
    if let Some(j) = used.iter().position(|u| !u) {
        return Err(orphan("visual", v[j].0));
    }
    Ok(pairs)
}

/// Parses a manifest, checks every referenced file exists and pairs the
/// frames.
pub fn load_session(manifest_path: &Path) -> Result<Session> {
    let text = read_text(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let manifest = SessionManifest::parse(&text, manifest_path)?.resolve(base);
    let mut paths: BTreeSet<&Path> = [manifest.landmarks.as_path(), &manifest.votes, &manifest.room].into_iter().collect();
    paths.extend(manifest.wearable.as_deref());
    paths.extend(manifest.thermal.iter().chain(&manifest.visual).map(|(_, p)| p.as_path()));
    if let Some(missing) = paths.into_iter().find(|p| !p.is_file()) {
        return Err(CliError::Session(format!("missing file {}", missing.display())));
    }
    let pairs = pair_frames(&manifest.thermal, &manifest.visual)?;
    Ok(Session { manifest, pairs })
}
