use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the numerical core can report.
///
/// Variants are grouped by class (see [`Error::class`]) so that front ends can
/// map them onto stable exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator is not Hermitian (max asymmetry {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("collapse operators do not commute (max commutator entry {residual:e})")]
    NonCommuting { residual: f64 },

    #[error("dimension {requested} exceeds the configured maximum {max}")]
    Capacity { requested: usize, max: usize },

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("invalid boost: |v| = {v} m/s is not below c")]
    InvalidBoost { v: f64 },

    #[error("no ordering inversion possible: |v_AB| = {v_ab} m/s does not exceed c")]
    NoInversionPossible { v_ab: f64 },

    #[error("time step {dt:e} s does not resolve correlation time {t_c:e} s (need dt < t_c/4)")]
    Resolution { dt: f64, t_c: f64 },

    #[error("expectation value has imaginary residue {residual:e}")]
    ImaginaryResidue { residual: f64 },

    #[error("step too large ({detail}); halve dt")]
    StepSize { detail: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

/// Coarse error classes, stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The caller supplied something outside a documented domain.
    Input,
    /// A numerical procedure failed its own accuracy contract.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ImaginaryResidue { .. } | Error::StepSize { .. } | Error::Quadrature(_) => ErrorClass::Numerical,
            _ => ErrorClass::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
