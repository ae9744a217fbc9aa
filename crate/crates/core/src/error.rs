use thiserror::Error;

/// Errors raised by the moment-system pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnudsenError {
    #[error("invalid moment order M = {order}: {reason}")]
    InvalidOrder { order: usize, reason: &'static str },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("index ({alpha}, {beta}) exceeds the supported range {limit}")]
    IndexOutOfRange {
        alpha: usize,
        beta: usize,
        limit: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular value {value:e} below rank tolerance {tolerance:e} (column {index})")]
    RankDeficient {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("boundary matrix K(chi) is not negative definite (chi = {chi}, M = {order})")]
    NotNegativeDefinite { chi: f64, order: usize },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("effective conductivity pole at y = {y}: 1 - dθ_d/dy = {denominator:e}")]
    ConductivityPole { y: f64, denominator: f64 },

    #[error("degenerate convergence ratio: denominator {0:e}")]
    DegenerateDifference(f64),

    #[error("linear solve failed: {0}")]
    LinearSolve(&'static str),
}

pub type Result<T> = std::result::Result<T, KnudsenError>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(KnudsenError::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_chi(chi: f64) -> Result<()> {
    if chi > 0.0 && chi <= 1.0 {
        Ok(())
    } else {
        Err(KnudsenError::InvalidParameter {
            name: "chi",
            value: chi,
            reason: "accommodation coefficient must lie in (0, 1]",
        })
    }
}
