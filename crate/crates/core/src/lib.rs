//! Visual/thermal registration, facial thermometry and personal
//! thermal-comfort models.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line
//! live in the `tcomfort` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;

pub mod calib;
pub mod comfort;
pub mod conditioning;
pub mod frame;
pub mod math;
pub mod register;
pub mod roi;
pub mod sim;
pub mod thermal;

pub use calib::{Correspondence, Homography, RigCalibration};
pub use error::{Error, Result};
pub use frame::{GrayFrame, ThermalFrame, VisualFrame};
pub use math::Point2;
pub use roi::{LandmarkSet, Rect, Region};
pub use thermal::{ReadingKind, Statistic};
