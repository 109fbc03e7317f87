use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes.
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_BAD_INPUT: i32 = 65;
pub const EXIT_PIPELINE: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: byte {offset}: {message}")]
    Parse { path: PathBuf, offset: usize, message: String },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Session(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Pipeline(#[from] tcomfort_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, line: usize, message: impl Into<String>) -> Self {
        CliError::Format { path: path.to_path_buf(), line, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Format { .. } | CliError::Session(_) => EXIT_BAD_INPUT,
            CliError::Pipeline(_) => EXIT_PIPELINE,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Format { .. } => "format",
            CliError::Session(_) => "session",
            CliError::Usage(_) => "usage",
            CliError::Pipeline(_) => "pipeline",
        }
    }

    /// Single-line report: `error code=<n> kind=<kind> message="<escaped>"`.
    pub fn report_line(&self) -> String {
        format!("error code={} kind={} message={:?}", self.exit_code(), self.kind(), self.to_string())
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
