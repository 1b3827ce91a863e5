use thiserror::Error;

/// Errors raised by the numerical routines and experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A_ij - conj(A_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("negative eigenvalue {value:e} in density operator")]
    NegativeEigenvalue { value: f64 },

    #[error("traces differ by {difference:e}")]
    TraceMismatch { difference: f64 },

    #[error("relative entropy is infinite: support of rho is not contained in support of sigma (weight {weight:e})")]
    SupportViolation { weight: f64 },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("spectrum is degenerate: gap {gap:e} below threshold {threshold:e}")]
    Degenerate { gap: f64, threshold: f64 },

    #[error("objective returned a non-finite value at parameter {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("empty data")]
    EmptyData,

    #[error("dimension {dim} exceeds the resource guard of {limit}")]
    ResourceLimit { dim: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
