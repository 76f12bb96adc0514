use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid clause: {0}")]
    InvalidClause(String),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("{what} requires {requested} bits but the cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance has no satisfying assignment: {0}")]
    Unsatisfiable(String),

    #[error("operation not supported for this instance: {0}")]
    Unsupported(String),

    #[error("eigensolver failed to converge after {iterations} iterations (residuals {residuals:?})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("norm drift {drift:.3e} exceeds bound {bound:.3e}; reduce the step size (dt = {dt})")]
    NormDrift { drift: f64, bound: f64, dt: f64 },

    #[error("step size {dt} violates the stability guard dt * {norm_bound} <= 0.1")]
    StepTooLarge { dt: f64, norm_bound: f64 },

    #[error("state is not normalized: |norm - 1| = {0:.3e}")]
    Unnormalized(f64),

    #[error("minimum gap is zero; the adiabatic time estimate is undefined")]
    ZeroGap,
}
