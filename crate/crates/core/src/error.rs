use thiserror::Error;

/// Errors raised while loading, configuring or solving a design instance.
#[derive(Debug, Error)]
pub enum Error {
    /// The document does not match the expected schema.
    #[error("parse error: {0}")]
    Parse(String),

    /// The document parsed but violates a map integrity rule.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The map cannot support any design (e.g. the OLT reaches no candidate).
    #[error("unusable map: {0}")]
    UnusableMap(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A route to the OLT does not exist.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid state: {0}")]
    State(String),

    /// An exhaustive routine was asked to handle an instance beyond its size gate.
    #[error("instance too large: {0}")]
    Size(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
