use thiserror::Error;

/// Errors raised by the laboratory.
///
/// The split between [`Error::is_validation`] and numerical diagnostics maps
/// onto the CLI exit statuses (2 and 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("support escape: scaled support reaches {reach:.6}, beyond the numeric domain {half_width:.6}; need half-width >= {reach:.6}")]
    SupportEscape { reach: f64, half_width: f64 },

    #[error("eigensolver did not converge after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    #[error("fitted slope {slope:.6} is {distance:.4} away from the nearest integer (tolerance {tolerance})")]
    NonIntegerExponent { slope: f64, distance: f64, tolerance: f64 },

    #[error("Fock space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: u128, cap: u128 },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("numerical self-check failed: {0}")]
    SelfCheck(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for input/config problems; false for numerical diagnostics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::SupportEscape { .. } | Error::DimensionCap { .. } | Error::Config(_) | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
