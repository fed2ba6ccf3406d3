use thiserror::Error;

/// Failures raised by the simulator.
///
/// Numerical guards (`TruncationRisk`, `EntanglementResidue`) are distinct
/// from configuration errors so callers can map them to different exit paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite complex amplitude ({re}, {im})")]
    NonFinite { re: f64, im: f64 },

    #[error("dimension {got} is below the minimum {min}")]
    DimensionTooSmall { got: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("truncation risk: {0}")]
    TruncationRisk(String),

    #[error("register dimension {dim} exceeds the guard {limit}")]
    DimensionGuardExceeded { dim: usize, limit: usize },

    #[error("bad subsystem assignment: {0}")]
    BadAssignment(String),

    #[error("subsystem {0} is not a qubit")]
    NotAQubit(usize),

    #[error("subsystem index {index} out of range for a register of {len} subsystems")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("phase {0} rad is not within tolerance of 0 or pi")]
    PhaseOutOfAlphabet(f64),

    #[error("final qubit-mode state is entangled (second Schmidt weight {0:e})")]
    EntanglementResidue(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl SimError {
    /// True for failures of the numerical guards rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SimError::TruncationRisk(_)
                | SimError::EntanglementResidue(_)
                | SimError::PhaseOutOfAlphabet(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
