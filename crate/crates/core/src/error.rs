//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The permutation fails the irreducibility test; most invariants are
    /// undefined for reducible data.
    #[error("reducible permutation: {0}")]
    Reducible(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("non-positive length for symbol '{0}'")]
    NonPositiveLength(String),

    #[error("point outside the domain interval")]
    OutOfDomain,

    /// The last top and bottom lengths coincide, so the induction step is
    /// undefined. Ties are never perturbed silently.
    #[error("tie between the last top and bottom lengths; induction undefined")]
    Tie,

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("requires exact arithmetic: {0}")]
    ExactOnly(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A flow orbit landed exactly on a base discontinuity (measure zero);
    /// exact backends refuse to continue.
    #[error("orbit hit a base discontinuity exactly")]
    DiscontinuityHit,

    /// A computed quantity violated a structural identity that must hold for
    /// any valid input; this signals a bug, not bad data.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
