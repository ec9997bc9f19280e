use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DjcmError {
    #[error("matrix is not Hermitian: |m[{row},{col}] - conj(m[{col},{row}])| = {defect:e}")]
    NotHermitian { row: usize, col: usize, defect: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below {tolerance:e}")]
    NotPositive { eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})"
    )]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("purity r must lie in [0, 1], got {0}")]
    PurityOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("state is not an X state: entry [{row},{col}] = {magnitude:e}; use the general concurrence routine")]
    NotXState {
        row: usize,
        col: usize,
        magnitude: f64,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("integrator configuration rejected: {0}")]
    IntegratorConfig(String),
}

pub type Result<T> = std::result::Result<T, DjcmError>;
