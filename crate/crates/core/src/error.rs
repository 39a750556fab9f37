use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every way an engine call can be rejected.
///
/// Rejected calls never modify the session they were applied to.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} `{id}` not found")]
    NotFound { what: &'static str, id: String },

    #[error("{what} `{value}` already exists")]
    Duplicate { what: &'static str, value: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("system `{system}` already has primary purpose `{current}`; changing it requires a revision with rationale")]
    Fixedness { system: String, current: String },

    #[error("sphere constraint violated by aspect `{aspect}`: {reason}")]
    Sphere { aspect: String, reason: String },

    #[error("purpose chain broken: {0}")]
    Chain(String),

    #[error("step {step} is {status}; {action} is not allowed")]
    Gating {
        step: u8,
        status: &'static str,
        action: &'static str,
    },

    #[error("assertion text must begin with \"{prefix}\"", prefix = crate::model::ASSERTION_PREFIX)]
    Template,

    #[error("referenced entity `{0}` does not exist in this session")]
    Reference(String),

    #[error("step {0} has no current assertion to complete")]
    EmptyStep(u8),

    #[error("step {0} is already complete")]
    AlreadyComplete(u8),

    #[error("assertion `{0}` has already been superseded")]
    StaleReference(String),

    #[error("{0}")]
    State(String),

    #[error("version conflict: expected {expected}, session is at {current}")]
    VersionConflict { expected: u64, current: u64 },

    #[error("malformed document at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported document format_version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable code for this error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotFound { .. } => "NOT_FOUND",
            Error::Duplicate { .. } => "DUPLICATE",
            Error::Validation(_) => "VALIDATION",
            Error::Fixedness { .. } => "FIXEDNESS",
            Error::Sphere { .. } => "SPHERE",
            Error::Chain(_) => "CHAIN",
            Error::Gating { .. } => "GATING",
            Error::Template => "TEMPLATE",
            Error::Reference(_) => "REFERENCE",
            Error::EmptyStep(_) => "EMPTY_STEP",
            Error::AlreadyComplete(_) => "ALREADY_COMPLETE",
            Error::StaleReference(_) => "STALE_REFERENCE",
            Error::State(_) => "STATE",
            Error::VersionConflict { .. } => "VERSION_CONFLICT",
            Error::Parse { .. } => "PARSE",
            Error::UnsupportedVersion { .. } => "UNSUPPORTED_VERSION",
            Error::InvalidDocument(_) => "INVALID_DOCUMENT",
            Error::Io { .. } => "IO",
        }
    }

    pub(crate) fn not_found(what: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound {
            what,
            id: id.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
