use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    /// An exact identity that the data is supposed to satisfy does not hold.
    #[error("identity violated: {identity}: {detail}")]
    IdentityViolation { identity: String, detail: String },

    #[error("degenerate ellipsoid piece {index}: {detail}")]
    DegeneratePiece { index: usize, detail: String },

    #[error("degenerate polarization at curve {index}: {detail}")]
    DegeneratePolarization { index: usize, detail: String },

    #[error("point outside the chart domain: {0}")]
    OutOfDomain(String),

    #[error("point on the singular locus gamma * R = 1")]
    SingularLocus,

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("finite-difference step {step} leaves the domain at {detail}")]
    StepTooLarge { step: f64, detail: String },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),
}
