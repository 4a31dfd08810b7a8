use std::path::PathBuf;

/// Errors raised while configuring, loading or exporting a run.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dpsm_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("invalid value for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("bad IDX magic 0x{found:08x}, expected 0x{expected:08x}")]
    BadMagic { found: u32, expected: u32 },

    #[error("truncated {what}: need {needed} bytes, have {available}")]
    Truncated {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("image index {index} out of range for a file of {count} images")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

pub(crate) fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl Error {
    /// Whether the error stems from user input (config, files, ranges)
    /// rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Core(dpsm_core::Error::NotConverged { .. }))
    }
}
