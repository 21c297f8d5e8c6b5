//! Crate-wide error type and result alias.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("label sets do not match: {0}")]
    LabelMismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("normalization violated: {0}")]
    NotNormalized(String),

    #[error("stochasticity violated: {0}")]
    NotStochastic(String),

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    EigNoConvergence { sweeps: usize },

    #[error("outcome enumeration size {size} exceeds cap {cap}")]
    EnumerationCap { size: u128, cap: usize },

    #[error(
        "solver failed to certify: bracket {bracket:.3e} exceeds tolerance {tol:.3e} \
         (lower {lower}, upper {upper})"
    )]
    NotCertified {
        lower: f64,
        upper: f64,
        bracket: f64,
        tol: f64,
    },

    #[error("group law violated: {0}")]
    GroupLaw(String),

    #[error("bad representation: {0}")]
    BadRepresentation(String),

    #[error("representation is reducible; the covariant solver requires an irreducible one")]
    ReducibleRepresentation,

    #[error("symmetry violated: {0}")]
    SymmetryViolation(String),

    #[error("collection was not established incompatible; run a compatibility check first")]
    NotEstablishedIncompatible,

    #[error("residual direction failed to separate after {retries} attempts (best gap {best_gap:.3e})")]
    NonSeparating { retries: usize, best_gap: f64 },

    #[error("theta {0} lies outside the admissible interval (0, pi/2]")]
    ThetaOutOfRange(f64),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
