//! File formats, the session pipeline and the `tcomfort` command line on
//! top of `tcomfort-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pipeline;
pub mod pnm;
pub mod simulate;
pub mod svg;

pub use error::{CliError, Result};
