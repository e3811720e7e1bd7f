use thiserror::Error;

use crate::rank::BallotKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: expected {expected} alternatives, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("kind mismatch: expected {expected} ballots, got {got}")]
    KindMismatch { expected: BallotKind, got: BallotKind },

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("invalid binary relation: {0}")]
    InvalidRelation(String),

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("unknown alternative {0}")]
    UnknownAlternative(String),

    #[error("invalid alternative set: {0}")]
    InvalidAlternativeSet(String),

    #[error("dispersion {0} outside the open interval (0, 1)")]
    DispersionOutOfRange(f64),

    #[error("significance level {0} outside the open interval (0, 1)")]
    AlphaOutOfRange(f64),

    #[error("empty profile")]
    EmptyProfile,

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("invalid above-set: {0}")]
    InvalidAboveSet(String),

    #[error("enumeration limit exceeded: {what} needs {needed} points, limit is {limit}")]
    EnumerationLimit {
        what: String,
        needed: u128,
        limit: u128,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid mixing distribution: {0}")]
    InvalidMixture(String),

    #[error("linear program failed: {0}")]
    Numerical(String),

    #[error("degenerate dual: {0}")]
    DegenerateDual(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}
