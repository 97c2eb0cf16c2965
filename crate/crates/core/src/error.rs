use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid tolerance policy: {0}")]
    Tolerance(String),

    #[error("point violates constraint row {row} (value {value}, required {required})")]
    InfeasiblePoint { row: usize, value: f64, required: String },

    #[error("measurement vector is identically zero; only the nontrivial case y != 0 is supported")]
    ZeroMeasurement,

    #[error("point is not consistent with the sign measurements (row {row})")]
    Inconsistent { row: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("combinatorial budget exceeded: {0}")]
    Budget(String),

    #[error("simplex solver failed: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
