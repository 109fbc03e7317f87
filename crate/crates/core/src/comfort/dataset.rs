use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{map_preference, ClassLabel, Scheme, VoteRecord};
use crate::conditioning::TimeSeries;
use crate::error::{Error, Result};
use crate::math::nearest_index;
use crate::roi::Region;
use crate::thermal::ReadingKind;

/// Per-frame region readings of one kind, possibly with gaps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameFeatures {
    pub timestamp_ms: u64,
    pub values: BTreeMap<Region, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub timestamp_ms: u64,
    /// One value per dataset region, in the dataset's region order.
    pub values: Vec<f64>,
    pub room_temp_c: Option<f64>,
    pub label: ClassLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub subject_id: String,
    pub scheme: Scheme,
    pub kind: ReadingKind,
    pub regions: Vec<Region>,
    /// Append room temperature as a final feature.
    pub with_room: bool,
    /// Vote timestamps; record windows are recovered from these.
    pub vote_times: Vec<u64>,
    pub records: Vec<FeatureRecord>,
}

impl Dataset {
    pub fn new(
        subject_id: String,
        scheme: Scheme,
        kind: ReadingKind,
        regions: Vec<Region>,
        with_room: bool,
        vote_times: Vec<u64>,
        records: Vec<FeatureRecord>,
    ) -> Result<Self> {
        if records.windows(2).any(|w| w[1].timestamp_ms <= w[0].timestamp_ms)
            || vote_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::NonIncreasingTimestamps);
        }
        for r in &records {
            if scheme.index_of(r.label).is_none() {
                return Err(Error::InvalidParameter("label not legal for scheme"));
            }
            if r.values.len() != regions.len() {
                return Err(Error::DimensionMismatch { expected: regions.len(), got: r.values.len() });
            }
            if with_room && r.room_temp_c.is_none() {
                return Err(Error::InvalidParameter("room temperature feature requested but missing"));
            }
        }
        Ok(Self { subject_id, scheme, kind, regions, with_room, vote_times, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.regions.len() + usize::from(self.with_room)
    }

    pub fn features(&self, i: usize) -> Vec<f64> {
        let r = &self.records[i];
        let mut v = r.values.clone();
        if self.with_room {
            v.push(r.room_temp_c.unwrap_or(f64::NAN));
        }
        v
    }

    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.features(i)).collect()
    }

    /// Class indices into `scheme.labels()`.
    pub fn label_indices(&self) -> Vec<usize> {
        self.records.iter().map(|r| self.scheme.index_of(r.label).expect("validated on construction")).collect()
    }

    pub fn class_counts(&self) -> BTreeMap<ClassLabel, usize> {
        let mut m = BTreeMap::new();
        for r in &self.records {
            *m.entry(r.label).or_insert(0) += 1;
        }
        m
    }

    /// Index of the vote window a record belongs to: the first vote at or
    /// after its timestamp.
    pub fn vote_window(&self, i: usize) -> usize {
        self.vote_times.partition_point(|&v| v < self.records[i].timestamp_ms)
    }
}

/// For each frame, the index of the vote that labels it: the vote at `t`
/// covers `(t_prev, t]`, and the first vote covers everything up to it.
/// Frames after the last vote get `None`.
pub fn assign_votes_to_frames(frame_times: &[u64], votes: &[VoteRecord]) -> Result<Vec<Option<usize>>> {
    if votes.is_empty() {
        return Err(Error::NoLabels);
    }
    if votes.windows(2).any(|w| w[1].timestamp_ms <= w[0].timestamp_ms)
        || frame_times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::NonIncreasingTimestamps);
    }
    Ok(frame_times
        .iter()
        .map(|&t| {
            let i = votes.partition_point(|v| v.timestamp_ms < t);
            (i < votes.len()).then_some(i)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyOptions {
    pub subject_id: String,
    pub scheme: Scheme,
    pub kind: ReadingKind,
    pub regions: Vec<Region>,
    pub with_room: bool,
}

/// Labels frames by vote window and keeps those with a value for every
/// requested region. Room temperature is attached by nearest timestamp
/// when a room series is given.
pub fn assemble_dataset(frames: &[FrameFeatures], votes: &[VoteRecord], room: Option<&TimeSeries>, opts: &AssemblyOptions) -> Result<Dataset> {
    let times: Vec<u64> = frames.iter().map(|f| f.timestamp_ms).collect();
    let assignment = assign_votes_to_frames(&times, votes)?;
    let room_times = room.map(|r| r.timestamps()).unwrap_or_default();
    if opts.with_room && room_times.is_empty() {
        return Err(Error::InvalidParameter("room temperature feature requested without a room series"));
    }
    let mut records = Vec::new();
    for (f, vote) in frames.iter().zip(assignment) {
        let Some(vote) = vote else { continue };
        let values: Option<Vec<f64>> = opts.regions.iter().map(|r| f.values.get(r).copied()).collect();
        let Some(values) = values else { continue };
        let room_temp_c = room.and_then(|r| nearest_index(&room_times, f.timestamp_ms).map(|i| r.samples()[i].1));
        records.push(FeatureRecord {
            timestamp_ms: f.timestamp_ms,
            values,
            room_temp_c,
            label: map_preference(votes[vote].preference, opts.scheme),
        });
    }
    Dataset::new(
        opts.subject_id.clone(),
        opts.scheme,
        opts.kind,
        opts.regions.clone(),
        opts.with_room,
        votes.iter().map(|v| v.timestamp_ms).collect(),
        records,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comfort::{Preference, Sensation};

    fn vote(t: u64, p: Preference) -> VoteRecord {
        VoteRecord { timestamp_ms: t, sensation: Sensation::Neutral, preference: p }
    }

    #[test]
    fn twenty_four_frames_per_vote() {
        let frames: Vec<u64> = (1..=720).map(|k| k * 5000).collect();
        let votes: Vec<VoteRecord> = (1..=30).map(|k| vote(k * 120_000, Preference::NoChange)).collect();
        let a = assign_votes_to_frames(&frames, &votes).unwrap();
        let mut counts = [0usize; 30];
        for v in a {
            counts[v.unwrap()] += 1;
        }
        assert!(counts.iter().all(|&c| c == 24));
    }

    #[test]
    fn boundary_and_trailing_frames() {
        let votes = [vote(100, Preference::Warmer), vote(200, Preference::Colder)];
        let a = assign_votes_to_frames(&[50, 100, 101, 200, 201], &votes).unwrap();
        assert_eq!(a, alloc::vec![Some(0), Some(0), Some(1), Some(1), None]);
        assert_eq!(assign_votes_to_frames(&[1, 2], &[]), Err(Error::NoLabels));
    }

    #[test]
    fn assembly_drops_gaps_and_maps_labels() {
        let mut frames = Vec::new();
        for t in [10u64, 20, 30, 40] {
            let mut values = BTreeMap::new();
            values.insert(Region::Nose, t as f64);
            if t != 30 {
                values.insert(Region::Forehead, 1.0);
            }
            frames.push(FrameFeatures { timestamp_ms: t, values });
        }
        let votes = [vote(20, Preference::SlightlyWarmer), vote(40, Preference::Colder)];
        let room = TimeSeries::new(alloc::vec![(0, 22.0), (35, 23.0)]).unwrap();
        let opts = AssemblyOptions {
            subject_id: "s".into(),
            scheme: Scheme::ThreeClass,
            kind: ReadingKind::SkinTemperatureC,
            regions: alloc::vec![Region::Nose, Region::Forehead],
            with_room: true,
        };
        let d = assemble_dataset(&frames, &votes, Some(&room), &opts).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.records[2].label, ClassLabel::Cooler);
        assert_eq!(d.features(2), alloc::vec![40.0, 1.0, 23.0]);
        assert_eq!(d.features(0), alloc::vec![10.0, 1.0, 22.0]);
        assert_eq!((0..3).map(|i| d.vote_window(i)).collect::<Vec<_>>(), alloc::vec![0, 0, 1]);
    }
}
