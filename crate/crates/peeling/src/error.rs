use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a formula, e.g. a boundary
    /// size below the model minimum.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied value is malformed (uniform outside (0,1), empty sample, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An exact identity failed; this signals a transcription bug, not bad luck.
    #[error("integrity failure: {0}")]
    Integrity(String),

    /// A configured guard (terms, volume, depth) was exceeded.
    #[error("resource guard exceeded: {0}")]
    Resource(String),

    /// The explored region is too small to decide the requested quantity.
    #[error("undetermined: {0}")]
    Undetermined(String),

    /// A truncated series cannot be certified to the requested tolerance.
    #[error("tail too large: {0}")]
    TailTooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
