//! Labeled datasets, correlation analysis, and personal comfort models.

pub mod dataset;
pub mod eval;
pub mod forest;
pub mod knn;
pub mod model;
pub mod reference;
pub mod standardize;
pub mod stats;
pub mod svm;

pub use dataset::{assemble_dataset, assign_votes_to_frames, Dataset, FeatureRecord, FrameFeatures};
pub use eval::{cross_validate, majority_baseline, EvalReport, Split};
pub use model::{predict, train, train_matrix, Hyperparameters, ModelArtifact, ModelKind, ModelState};
pub use reference::{compare_reference, AlignedSample, ReferenceReport, DEFAULT_ALIGN_TOLERANCE_MS};
pub use standardize::Standardizer;
pub use stats::{correlation_table, pearson, polyfit_trend, CorrelationCell, CorrelationTable, PolyFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sensation {
    Cold,
    Cool,
    SlightlyCool,
    Neutral,
    SlightlyWarm,
    Warm,
    Hot,
}

impl Sensation {
    pub const ALL: [Sensation; 7] = [
        Sensation::Cold,
        Sensation::Cool,
        Sensation::SlightlyCool,
        Sensation::Neutral,
        Sensation::SlightlyWarm,
        Sensation::Warm,
        Sensation::Hot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sensation::Cold => "Cold",
            Sensation::Cool => "Cool",
            Sensation::SlightlyCool => "SlightlyCool",
            Sensation::Neutral => "Neutral",
            Sensation::SlightlyWarm => "SlightlyWarm",
            Sensation::Warm => "Warm",
            Sensation::Hot => "Hot",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preference {
    Warmer,
    SlightlyWarmer,
    NoChange,
    SlightlyCooler,
    Colder,
}

impl Preference {
    pub const ALL: [Preference; 5] =
        [Preference::Warmer, Preference::SlightlyWarmer, Preference::NoChange, Preference::SlightlyCooler, Preference::Colder];

    pub fn name(self) -> &'static str {
        match self {
            Preference::Warmer => "Warmer",
            Preference::SlightlyWarmer => "SlightlyWarmer",
            Preference::NoChange => "NoChange",
            Preference::SlightlyCooler => "SlightlyCooler",
            Preference::Colder => "Colder",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoteRecord {
    pub timestamp_ms: u64,
    pub sensation: Sensation,
    pub preference: Preference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    ThreeClass,
    FourClass,
}

impl Scheme {
    /// Class labels in index order. Model outputs are indices into this.
    pub fn labels(self) -> &'static [ClassLabel] {
        match self {
            Scheme::ThreeClass => &[ClassLabel::Cooler, ClassLabel::NoChange, ClassLabel::Warmer],
            Scheme::FourClass => &[ClassLabel::Colder, ClassLabel::SlightlyCooler, ClassLabel::NoChange, ClassLabel::Warmer],
        }
    }

    pub fn n_classes(self) -> usize {
        self.labels().len()
    }

    pub fn index_of(self, label: ClassLabel) -> Option<usize> {
        self.labels().iter().position(|&l| l == label)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ThreeClass => "three_class",
            Scheme::FourClass => "four_class",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "three_class" => Some(Scheme::ThreeClass),
            "four_class" => Some(Scheme::FourClass),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Colder,
    SlightlyCooler,
    Cooler,
    NoChange,
    Warmer,
}

impl ClassLabel {
    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Colder => "Colder",
            ClassLabel::SlightlyCooler => "SlightlyCooler",
            ClassLabel::Cooler => "Cooler",
            ClassLabel::NoChange => "NoChange",
            ClassLabel::Warmer => "Warmer",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [ClassLabel::Colder, ClassLabel::SlightlyCooler, ClassLabel::Cooler, ClassLabel::NoChange, ClassLabel::Warmer]
            .into_iter()
            .find(|v| v.name() == s)
    }
}

pub fn map_preference(p: Preference, scheme: Scheme) -> ClassLabel {
    match (scheme, p) {
        (_, Preference::NoChange) => ClassLabel::NoChange,
        (_, Preference::Warmer | Preference::SlightlyWarmer) => ClassLabel::Warmer,
        (Scheme::ThreeClass, Preference::SlightlyCooler | Preference::Colder) => ClassLabel::Cooler,
        (Scheme::FourClass, Preference::SlightlyCooler) => ClassLabel::SlightlyCooler,
        (Scheme::FourClass, Preference::Colder) => ClassLabel::Colder,
    }
}
