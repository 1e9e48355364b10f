//! Shared error type for the whole laboratory.

/// Crate-wide error enum. Variants mirror the failure modes of the estimator
/// pipeline: bad inputs, scale ranges that the finite resolution cannot
/// honour, and internal consistency checks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operation requires a non-empty set.
    #[error("empty set: {0}")]
    EmptySet(String),

    /// An argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index or level is out of range for the given structure.
    #[error("range error: {0}")]
    Range(String),

    /// Inconsistent configuration (dimension/depth mismatches and similar).
    #[error("config error: {0}")]
    Config(String),

    /// The requested scales are finer than the tree resolution.
    /// `min_delta` is the smallest admissible coarse scale at this depth.
    #[error("resolution error: {msg} (minimum admissible delta {min_delta:e})")]
    Resolution { msg: String, min_delta: f64 },

    /// The coarse and fine scales of a two-scale construction collapse into
    /// the same dyadic level.
    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    /// An enumeration exceeded its configured budget.
    #[error("over limit: {0}")]
    OverLimit(String),

    /// A bisection target is not bracketed on the search interval.
    #[error("not bracketed: {0}")]
    NonBracketed(String),

    /// Kernel energy of a probability measure vanished (cannot happen for
    /// well-formed inputs; kept as a guard).
    #[error("zero energy")]
    ZeroEnergy,

    /// A configuration that is out of the supported scope.
    #[error("not implemented: {0}")]
    NotImplemented(String),

    /// A runtime invariant check failed.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
