use thiserror::Error;

/// Errors produced by the pipeline kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("at least 4 correspondences required, got {0}")]
    TooFewCorrespondences(usize),
    #[error("degenerate configuration")]
    DegenerateConfiguration,
    #[error("homography is not invertible")]
    SingularHomography,
    #[error("registration failed")]
    RegistrationFailed,
    #[error("no calibration frames supplied")]
    EmptyCalibration,

    #[error("expected 68 landmarks, got {0}")]
    LandmarkCount(usize),
    #[error("landmark {0} is not finite")]
    NonFiniteLandmark(usize),
    #[error("landmark {0} lies outside the frame")]
    LandmarkOutOfBounds(usize),
    #[error("face below minimum scale")]
    FaceBelowMinimumScale,
    #[error("no usable ROI in thermal frame")]
    NoUsableRoi,

    #[error("implausible radiometric sample (raw {0})")]
    ImplausibleRadiometric(u16),
    #[error("ROI too small")]
    RoiTooSmall,
    #[error("reading kind does not match the frame's radiometric flag")]
    KindMismatch,

    #[error("timestamps must be strictly increasing")]
    NonIncreasingTimestamps,

    #[error("no labels")]
    NoLabels,
    #[error("undefined correlation")]
    UndefinedCorrelation,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("rank-deficient fit")]
    RankDeficient,
    #[error("no aligned pairs")]
    NoAlignedPairs,

    #[error("training needs at least two classes")]
    SingleClass,
    #[error("class {class} has {count} records, at least {needed} required")]
    TooFewPerClass { class: usize, count: usize, needed: usize },
    #[error("non-finite feature value")]
    NonFiniteFeature,
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("a class is absent from a training fold after all retries")]
    ClassAbsentFromTraining,
    #[error("malformed model artifact: {0}")]
    ModelFormat(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
