use thiserror::Error;

/// Errors raised while validating, ingesting or modelling trajectory data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate sample for session {session_id}, track {track_id}, t={t}")]
    DuplicateSample {
        session_id: String,
        track_id: String,
        t: u32,
    },

    #[error("session {0} is not declared in the manifest")]
    UnknownSession(String),

    #[error("regions {0} and {1} overlap")]
    OverlappingRegions(String, String),

    #[error("direction change is undefined for a zero-length segment")]
    UndefinedAngle,

    #[error("training set contains a single class")]
    SingleClass,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
