//! Error taxonomy shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

/// Failure modes of the laboratory operations.
///
/// `InvalidArgument` covers contract violations a caller can fix by choosing
/// different parameters; `Resolution` covers inputs that are legal but not
/// representable on the requested grid/window (too much bandwidth, support or
/// transport for the periodic domain).
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("resolution: {0}")]
    Resolution(String),

    /// Fractional derivative of negative order at μ = 0 with spectral mass
    /// sitting on the singular ξ = 0 bin.
    #[error("singular multiplier: {0}")]
    SingularMultiplier(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The space–time separation functional only applies to profiles sharing
    /// (h, ξ); other pairs belong to the scale–frequency branch.
    #[error("wrong orthogonality branch: {0}")]
    WrongBranch(String),

    #[error("no admissible dyadic pair: {0}")]
    NoPair(String),

    #[error("numerical instability: {0}")]
    Instability(String),
}

impl LabError {
    /// Exit status the batch runner maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Resolution(_) | LabError::SingularMultiplier(_) => 2,
            _ => 1,
        }
    }
}
