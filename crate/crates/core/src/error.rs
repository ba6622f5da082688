use thiserror::Error;

/// Errors raised by the gate models and their numerical machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix exponential failed to converge")]
    ConvergenceFailure,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("reflection denominator vanishes (|d| = {0:e})")]
    DivergentDenominator(f64),

    #[error("quadrature not converged: doubling the node count changed rho by {0:e}")]
    QuadratureNotConverged(f64),

    #[error("effective decoherence rate is zero, the optimum diverges")]
    ZeroDecoherence,

    #[error("excited/ground splitting is infinite; use the same-spin resonance mode")]
    IdealSplitting,

    #[error("master-equation integration not converged: halving the step changed rho by {0:e}")]
    StepNotConverged(f64),

    #[error("failure branch undefined: 1 - p = {0:e}")]
    DegenerateBranch(f64),

    #[error("state is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("best grid cell {0} lies on the sweep boundary")]
    BoundaryMaximum(usize),

    #[error("sweep produced no finite values")]
    EmptySweep,

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T, E = GateError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> GateError {
    GateError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}
