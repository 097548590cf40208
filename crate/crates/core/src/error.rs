use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A domain value violates its construction invariant.
    #[error("invalid {what}: {reason}")]
    Validation { what: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("input too short: {0}")]
    InputTooShort(String),

    /// The two members of an analysis pair are not comparable.
    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("no usable region: {0}")]
    NoUsableRegion(String),

    #[error("noise floor unavailable for '{0}': recording is noise-truncated, supply the noise energy explicitly")]
    NoiseFloorUnavailable(String),

    #[error("insufficient decay range: {0}")]
    InsufficientDecay(String),

    #[error("no defined coherence points in the rated range")]
    AllUndefined,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Wav { path: PathBuf, reason: String },

    #[error("{path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn validation(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            what,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the inputs (files, manifests, invalid data)
    /// rather than by the analysis itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Wav { .. }
                | Error::Manifest { .. }
                | Error::Validation { .. }
                | Error::Config(_)
                | Error::Pairing(_)
        )
    }
}
