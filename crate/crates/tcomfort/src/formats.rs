//! Line-oriented sidecars and tables.
//!
//! Every text file may open with `#` lines; readers skip them except for
//! the `# key=value` headers a format defines. Writers put a provenance
//! header first.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use tcomfort_core::calib::RigCalibration;
use tcomfort_core::comfort::{ClassLabel, CorrelationTable, Dataset, EvalReport, FeatureRecord, Preference, Scheme, Sensation, VoteRecord};
use tcomfort_core::conditioning::ConditioningReport;
use tcomfort_core::register::RegistrationResult;
use tcomfort_core::roi::{LandmarkProvider, LandmarkSet, LANDMARK_COUNT};
use tcomfort_core::thermal::RoiReading;
use tcomfort_core::{Correspondence, Homography, Point2, ReadingKind, Region};

use crate::error::{read_text, CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# tcomfort <version> format=<format>` followed by `# config <config>`.
pub fn provenance(format: &str, config: &str) -> String {
    format!("# tcomfort {VERSION} format={format}\n# config {config}\n")
}

/// Non-blank, non-comment lines with 1-based line numbers.
pub fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Value of a `# key=value` header line.
pub fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .map_while(|l| l.trim().strip_prefix('#'))
        .find_map(|l| l.trim().strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .map(str::trim)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| CliError::format(path, line, format!("bad {what} {s:?}")))
}

/// Splits a CSV table, checking the header row.
fn csv_rows<'a>(text: &'a str, path: &Path, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((n, h)) => return Err(CliError::format(path, n, format!("expected header {header:?}, found {h:?}"))),
        None => return Err(CliError::format(path, 0, format!("missing header {header:?}"))),
    }
    let width = header.split(',').count();
    lines
        .map(|(n, l)| {
            let cols: Vec<&str> = l.split(',').map(str::trim).collect();
            if cols.len() != width {
                return Err(CliError::format(path, n, format!("expected {width} columns, found {}", cols.len())));
            }
            Ok((n, cols))
        })
        .collect()
}

fn region(path: &Path, line: usize, s: &str) -> Result<Region> {
    Region::from_name(s).ok_or_else(|| CliError::format(path, line, format!("unknown region {s:?}")))
}

fn kind(path: &Path, line: usize, s: &str) -> Result<ReadingKind> {
    ReadingKind::from_name(s).ok_or_else(|| CliError::format(path, line, format!("unknown reading kind {s:?}")))
}

// ---------------------------------------------------------------------------
// Landmarks: `frame_id x0 y0 ... x67 y67`, frame_id = pair timestamp (ms).

pub fn parse_landmarks(text: &str, path: &Path) -> Result<BTreeMap<u64, LandmarkSet>> {
    let mut out = BTreeMap::new();
    for (n, line) in data_lines(text) {
        let mut tok = line.split_whitespace();
        let id: u64 = field(path, n, tok.next().unwrap_or(""), "frame_id")?;
        let nums: Vec<f64> = tok.map(|t| field(path, n, t, "coordinate")).collect::<Result<_>>()?;
        if nums.len() != 2 * LANDMARK_COUNT {
            return Err(CliError::format(path, n, format!("expected {} coordinates, found {}", 2 * LANDMARK_COUNT, nums.len())));
        }
        let set = LandmarkSet::new(nums.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect()).map_err(|e| CliError::format(path, n, e.to_string()))?;
        if out.insert(id, set).is_some() {
            return Err(CliError::format(path, n, format!("duplicate frame_id {id}")));
        }
    }
    Ok(out)
}

pub fn landmarks_to_text(entries: &BTreeMap<u64, LandmarkSet>, header: &str) -> String {
    let mut s = String::from(header);
    for (id, set) in entries {
        write!(s, "{id}").unwrap();
        for p in set.points() {
            write!(s, " {} {}", p.x, p.y).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Landmarks looked up by frame id; frames without a line have no face.
#[derive(Debug, Clone, Default)]
pub struct FileLandmarks(pub BTreeMap<u64, LandmarkSet>);

impl FileLandmarks {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self(parse_landmarks(&read_text(path)?, path)?))
    }
}

impl LandmarkProvider for FileLandmarks {
    fn landmarks(&self, frame_id: u64) -> tcomfort_core::Result<Option<LandmarkSet>> {
        Ok(self.0.get(&frame_id).cloned())
    }
}

// ---------------------------------------------------------------------------
// Votes, room log, wearable log.

pub const VOTES_HEADER: &str = "timestamp_ms,sensation,preference";
pub const ROOM_HEADER: &str = "timestamp_ms,temp_C,rh_pct";
pub const WEARABLE_HEADER: &str = "timestamp_ms,temp_C";

pub fn parse_votes(text: &str, path: &Path) -> Result<Vec<VoteRecord>> {
    let votes: Vec<VoteRecord> = csv_rows(text, path, VOTES_HEADER)?
        .into_iter()
        .map(|(n, c)| {
            Ok(VoteRecord {
                timestamp_ms: field(path, n, c[0], "timestamp")?,
                sensation: Sensation::from_name(c[1]).ok_or_else(|| CliError::format(path, n, format!("unknown sensation {:?}", c[1])))?,
                preference: Preference::from_name(c[2]).ok_or_else(|| CliError::format(path, n, format!("unknown preference {:?}", c[2])))?,
            })
        })
        .collect::<Result<_>>()?;
    if votes.windows(2).any(|w| w[1].timestamp_ms <= w[0].timestamp_ms) {
        return Err(CliError::format(path, 0, "vote timestamps must be strictly increasing"));
    }
    Ok(votes)
}

pub fn votes_to_text(votes: &[VoteRecord], header: &str) -> String {
    let mut s = format!("{header}{VOTES_HEADER}\n");
    for v in votes {
        writeln!(s, "{},{},{}", v.timestamp_ms, v.sensation.name(), v.preference.name()).unwrap();
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomSample {
    pub timestamp_ms: u64,
    pub temp_c: f64,
    pub rh_pct: f64,
}

pub fn parse_room(text: &str, path: &Path) -> Result<Vec<RoomSample>> {
    let rows: Vec<RoomSample> = csv_rows(text, path, ROOM_HEADER)?
        .into_iter()
        .map(|(n, c)| Ok(RoomSample { timestamp_ms: field(path, n, c[0], "timestamp")?, temp_c: field(path, n, c[1], "temperature")?, rh_pct: field(path, n, c[2], "humidity")? }))
        .collect::<Result<_>>()?;
    if rows.windows(2).any(|w| w[1].timestamp_ms <= w[0].timestamp_ms) {
        return Err(CliError::format(path, 0, "room timestamps must be strictly increasing"));
    }
    Ok(rows)
}

pub fn room_to_text(rows: &[RoomSample], header: &str) -> String {
    let mut s = format!("{header}{ROOM_HEADER}\n");
    for r in rows {
        writeln!(s, "{},{},{}", r.timestamp_ms, r.temp_c, r.rh_pct).unwrap();
    }
    s
}

pub fn parse_wearable(text: &str, path: &Path) -> Result<Vec<(u64, f64)>> {
    csv_rows(text, path, WEARABLE_HEADER)?.into_iter().map(|(n, c)| Ok((field(path, n, c[0], "timestamp")?, field(path, n, c[1], "temperature")?))).collect()
}

pub fn wearable_to_text(rows: &[(u64, f64)], header: &str) -> String {
    let mut s = format!("{header}{WEARABLE_HEADER}\n");
    for (t, v) in rows {
        writeln!(s, "{t},{v}").unwrap();
    }
    s
}

// ---------------------------------------------------------------------------
// Calibration: correspondences `sx sy dx dy` and the rig prior.

pub fn parse_correspondences(text: &str, path: &Path) -> Result<Vec<Correspondence>> {
    data_lines(text)
        .map(|(n, l)| {
            let v: Vec<f64> = l.split_whitespace().map(|t| field(path, n, t, "coordinate")).collect::<Result<_>>()?;
            match v[..] {
                [sx, sy, dx, dy] => Ok(Correspondence::new(sx, sy, dx, dy)),
                _ => Err(CliError::format(path, n, format!("expected 4 numbers, found {}", v.len()))),
            }
        })
        .collect()
}

pub fn correspondences_to_text(c: &[Correspondence], header: &str) -> String {
    let mut s = format!("{header}# sx sy dx dy\n");
    for c in c {
        writeln!(s, "{} {} {} {}", c.src.x, c.src.y, c.dst.x, c.dst.y).unwrap();
    }
    s
}

fn join<T: std::fmt::Display>(v: impl IntoIterator<Item = T>, sep: &str) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn prior_to_text(rig: &RigCalibration, header: &str) -> String {
    format!(
        "{header}h={}\nrms_residual_px={}\nframes_used={}\ninlier_fraction={}\n",
        join(rig.prior.to_array(), " "),
        rig.rms_residual,
        rig.frames_used,
        rig.inlier_fraction
    )
}

fn key_values<'a>(text: &'a str, path: &Path) -> Result<BTreeMap<&'a str, (usize, &'a str)>> {
    data_lines(text)
        .map(|(n, l)| l.split_once('=').map(|(k, v)| (k.trim(), (n, v.trim()))).ok_or_else(|| CliError::format(path, n, "expected key=value")))
        .collect()
}

fn homography_field(path: &Path, line: usize, v: &str) -> Result<Homography> {
    let nums: Vec<f64> = v.split_whitespace().map(|t| field(path, line, t, "matrix element")).collect::<Result<_>>()?;
    let arr: [f64; 9] = nums.try_into().map_err(|_| CliError::format(path, line, "expected 9 matrix elements"))?;
    Homography::from_array(arr).map_err(|e| CliError::format(path, line, e.to_string()))
}

pub fn parse_prior(text: &str, path: &Path) -> Result<RigCalibration> {
    let kv = key_values(text, path)?;
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| CliError::format(path, 0, format!("missing key {k}")));
    let (n, h) = get("h")?;
    let (n1, rms) = get("rms_residual_px")?;
    let (n2, used) = get("frames_used")?;
    let (n3, frac) = get("inlier_fraction")?;
    Ok(RigCalibration {
        prior: homography_field(path, n, h)?,
        rms_residual: field(path, n1, rms, "rms_residual_px")?,
        frames_used: field(path, n2, used, "frames_used")?,
        inlier_fraction: field(path, n3, frac, "inlier_fraction")?,
    })
}

// ---------------------------------------------------------------------------
// Registration log: `frame_id n_matches n_inliers used_fallback mean_reproj_px h00..h22`.

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationRecord {
    pub frame_id: u64,
    pub result: RegistrationResult,
}

pub fn registration_log_to_text(records: &[RegistrationRecord], header: &str) -> String {
    let mut s = format!("{header}# frame_id n_matches n_inliers used_fallback mean_reproj_px h00 h01 h02 h10 h11 h12 h20 h21 h22\n");
    for r in records {
        let x = &r.result;
        writeln!(s, "{} {} {} {} {} {}", r.frame_id, x.n_matches, x.n_inliers, x.used_fallback as u8, x.mean_reproj_px, join(x.homography.to_array(), " ")).unwrap();
    }
    s
}

pub fn parse_registration_log(text: &str, path: &Path) -> Result<Vec<RegistrationRecord>> {
    data_lines(text)
        .map(|(n, l)| {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 14 {
                return Err(CliError::format(path, n, format!("expected 14 fields, found {}", t.len())));
            }
            let used_fallback = match t[3] {
                "0" => false,
                "1" => true,
                v => return Err(CliError::format(path, n, format!("bad used_fallback {v:?}"))),
            };
            Ok(RegistrationRecord {
                frame_id: field(path, n, t[0], "frame_id")?,
                result: RegistrationResult {
                    n_matches: field(path, n, t[1], "n_matches")?,
                    n_inliers: field(path, n, t[2], "n_inliers")?,
                    used_fallback,
                    mean_reproj_px: field(path, n, t[4], "mean_reproj_px")?,
                    homography: homography_field(path, n, &t[5..].join(" "))?,
                },
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Features table.

pub const FEATURES_HEADER: &str = "timestamp_ms,region,kind,value,n_pixels";

pub fn parse_features(text: &str, path: &Path) -> Result<Vec<RoiReading>> {
    csv_rows(text, path, FEATURES_HEADER)?
        .into_iter()
        .map(|(n, c)| {
            Ok(RoiReading {
                timestamp_ms: field(path, n, c[0], "timestamp")?,
                region: region(path, n, c[1])?,
                kind: kind(path, n, c[2])?,
                value: field(path, n, c[3], "value")?,
                n_pixels: field(path, n, c[4], "n_pixels")?,
            })
        })
        .collect()
}

pub fn features_to_text(rows: &[RoiReading], header: &str) -> String {
    let mut s = format!("{header}{FEATURES_HEADER}\n");
    for r in rows {
        writeln!(s, "{},{},{},{},{}", r.timestamp_ms, r.region.name(), r.kind.name(), r.value, r.n_pixels).unwrap();
    }
    s
}

/// Readings grouped per (region, kind), each sorted by timestamp.
pub fn group_features(rows: &[RoiReading]) -> BTreeMap<(Region, ReadingKind), Vec<RoiReading>> {
    let mut out: BTreeMap<(Region, ReadingKind), Vec<RoiReading>> = BTreeMap::new();
    for r in rows {
        out.entry((r.region, r.kind)).or_default().push(*r);
    }
    out.values_mut().for_each(|v| v.sort_by_key(|r| r.timestamp_ms));
    out
}

pub const CONDITIONING_HEADER: &str = "region,kind,n_outliers_removed,window,outlier_indices";

pub fn conditioning_report_to_text(reports: &[(Region, ReadingKind, ConditioningReport)], header: &str) -> String {
    let mut s = format!("{header}{CONDITIONING_HEADER}\n");
    for (r, k, c) in reports {
        writeln!(s, "{},{},{},{},{}", r.name(), k.name(), c.n_outliers_removed, c.window, join(&c.outlier_indices, " ")).unwrap();
    }
    s
}

// ---------------------------------------------------------------------------
// Dataset: `timestamp_ms,label,kind,<regions>,room_temp_C?`.

pub fn dataset_to_text(d: &Dataset, header: &str) -> String {
    let has_room = d.records.iter().all(|r| r.room_temp_c.is_some()) && !d.records.is_empty();
    let mut s = String::from(header);
    writeln!(s, "# subject_id={}", d.subject_id).unwrap();
    writeln!(s, "# scheme={}", d.scheme.name()).unwrap();
    writeln!(s, "# with_room={}", d.with_room).unwrap();
    writeln!(s, "# votes_ms={}", join(&d.vote_times, " ")).unwrap();
    let mut cols = vec!["timestamp_ms", "label", "kind"];
    cols.extend(d.regions.iter().map(|r| r.name()));
    if has_room {
        cols.push("room_temp_C");
    }
    writeln!(s, "{}", cols.join(",")).unwrap();
    for r in &d.records {
        write!(s, "{},{},{}", r.timestamp_ms, r.label.name(), d.kind.name()).unwrap();
        for v in &r.values {
            write!(s, ",{v}").unwrap();
        }
        if has_room {
            write!(s, ",{}", r.room_temp_c.expect("checked above")).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn parse_dataset(text: &str, path: &Path) -> Result<Dataset> {
    let need = |k: &str| header_value(text, k).ok_or_else(|| CliError::format(path, 0, format!("missing header # {k}=")));
    let subject_id = need("subject_id")?.to_string();
    let scheme = Scheme::from_name(need("scheme")?).ok_or_else(|| CliError::format(path, 0, "unknown scheme"))?;
    let with_room: bool = field(path, 0, need("with_room")?, "with_room")?;
    let vote_times: Vec<u64> = need("votes_ms")?.split_whitespace().map(|t| field(path, 0, t, "vote timestamp")).collect::<Result<_>>()?;
    let mut lines = data_lines(text);
    let (hn, header) = lines.next().ok_or_else(|| CliError::format(path, 0, "missing column header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 4 || cols[..3] != ["timestamp_ms", "label", "kind"] {
        return Err(CliError::format(path, hn, "expected columns timestamp_ms,label,kind,<regions>"));
    }
    let has_room = cols.last() == Some(&"room_temp_C");
    let region_cols = &cols[3..cols.len() - has_room as usize];
    let regions: Vec<Region> = region_cols.iter().map(|c| region(path, hn, c)).collect::<Result<_>>()?;
    let mut data_kind = None;
    let mut records = Vec::new();
    for (n, line) in lines {
        let c: Vec<&str> = line.split(',').map(str::trim).collect();
        if c.len() != cols.len() {
            return Err(CliError::format(path, n, format!("expected {} columns, found {}", cols.len(), c.len())));
        }
        let k = kind(path, n, c[2])?;
        if *data_kind.get_or_insert(k) != k {
            return Err(CliError::format(path, n, "mixed reading kinds"));
        }
        let values: Vec<f64> = c[3..3 + regions.len()].iter().map(|v| field(path, n, v, "feature")).collect::<Result<_>>()?;
        records.push(FeatureRecord {
            timestamp_ms: field(path, n, c[0], "timestamp")?,
            values,
            room_temp_c: if has_room { Some(field(path, n, c[c.len() - 1], "room temperature")?) } else { None },
            label: ClassLabel::from_name(c[1]).ok_or_else(|| CliError::format(path, n, format!("unknown label {:?}", c[1])))?,
        });
    }
    let kind = data_kind.unwrap_or(ReadingKind::SkinTemperatureC);
    Dataset::new(subject_id, scheme, kind, regions, with_room, vote_times, records).map_err(|e| CliError::format(path, 0, e.to_string()))
}

// ---------------------------------------------------------------------------
// Evaluation report and correlation table.

pub fn eval_report_to_text(r: &EvalReport, baseline: f64, header: &str) -> String {
    let labels = r.scheme.labels();
    let mut s = String::from(header);
    writeln!(s, "model={}", r.kind.name()).unwrap();
    writeln!(s, "scheme={}", r.scheme.name()).unwrap();
    writeln!(s, "split={}", r.split.name()).unwrap();
    writeln!(s, "folds={}", r.n_folds).unwrap();
    writeln!(s, "seed={}", r.seed).unwrap();
    let h = &r.hyper;
    writeln!(s, "hyperparameters=n_trees:{} min_leaf:{} k:{} svm_c:{} svm_tol:{}", h.n_trees, h.min_leaf, h.k, h.svm_c, h.svm_tol).unwrap();
    writeln!(s, "records={}", r.total()).unwrap();
    writeln!(s, "accuracy={}", r.accuracy).unwrap();
    writeln!(s, "majority_baseline={baseline}").unwrap();
    writeln!(s, "labels={}", join(labels.iter().map(|l| l.name()), ",")).unwrap();
    writeln!(s, "precision={}", join(&r.precision, ",")).unwrap();
    writeln!(s, "support={}", join(r.supports(), ",")).unwrap();
    let fold_sizes: Vec<usize> = (0..r.n_folds).map(|f| r.folds.iter().filter(|&&g| g == f).count()).collect();
    writeln!(s, "fold_sizes={}", join(fold_sizes, ",")).unwrap();
    writeln!(s, "# confusion rows are true classes, columns predictions").unwrap();
    for (label, row) in labels.iter().zip(&r.confusion) {
        writeln!(s, "confusion.{}={}", label.name(), join(row, ",")).unwrap();
    }
    s
}

/// Labels and confusion matrix of an evaluation report.
pub fn parse_confusion(text: &str, path: &Path) -> Result<(Vec<String>, Vec<Vec<u64>>)> {
    let kv = key_values(text, path)?;
    let (_, labels) = kv.get("labels").copied().ok_or_else(|| CliError::format(path, 0, "missing labels"))?;
    let labels: Vec<String> = labels.split(',').map(str::to_string).collect();
    let rows = labels
        .iter()
        .map(|l| {
            let (n, row) = kv.get(format!("confusion.{l}").as_str()).copied().ok_or_else(|| CliError::format(path, 0, format!("missing confusion row {l}")))?;
            let row: Vec<u64> = row.split(',').map(|v| field(path, n, v, "count")).collect::<Result<_>>()?;
            if row.len() != labels.len() {
                return Err(CliError::format(path, n, "confusion row length"));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok((labels, rows))
}

pub const CORRELATION_HEADER: &str = "region,kind,r,n";

pub fn correlation_to_text(t: &CorrelationTable, header: &str) -> String {
    let mut s = format!("{header}{CORRELATION_HEADER}\n");
    for c in &t.cells {
        let r = c.r.map_or("NA".to_string(), |r| r.to_string());
        writeln!(s, "{},{},{},{}", c.region.name(), c.kind.name(), r, c.n).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lookup_stops_at_data() {
        let t = "# a=1\n# b = 2\nx\n# c=3\n";
        assert_eq!(header_value(t, "a"), Some("1"));
        assert_eq!(header_value(t, "b "), Some("2"));
        assert_eq!(header_value(t, "c"), None);
    }

    #[test]
    fn votes_reject_bad_names() {
        let p = Path::new("v.csv");
        let ok = format!("{VOTES_HEADER}\n120000,Neutral,NoChange\n");
        assert_eq!(parse_votes(&ok, p).unwrap().len(), 1);
        let bad = format!("{VOTES_HEADER}\n120000,Neutral,Hotter\n");
        assert!(matches!(parse_votes(&bad, p), Err(CliError::Format { line: 2, .. })));
        assert!(parse_votes("time,s,p\n", p).is_err());
    }

    #[test]
    fn landmark_lines_need_68_points() {
        let p = Path::new("lm.txt");
        let line: String = (0..136).map(|i| format!(" {}", i as f64 + 0.5)).collect();
        let parsed = parse_landmarks(&format!("7{line}\n"), p).unwrap();
        assert_eq!(parsed[&7].points()[1], Point2::new(2.5, 3.5));
        assert!(parse_landmarks("7 1 2 3\n", p).is_err());
        assert_eq!(landmarks_to_text(&parsed, ""), format!("7{line}\n"));
    }
}
