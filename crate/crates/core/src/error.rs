use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget { max_steps: usize, t: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite derivative at t = {t}")]
    NonFiniteDerivative { t: f64 },

    #[error("sample time {t} outside the integration span [{t0}, {t1}]")]
    SampleOutOfSpan { t: f64, t0: f64, t1: f64 },

    #[error("chi-bar has a pole at xi = {xi} (denominator {denom})")]
    ChibarPole { xi: f64, denom: f64 },

    #[error("residual check failed: sup |f(v)| = {residual} exceeds {limit}")]
    ResidualCheck { residual: f64, limit: f64 },

    #[error("exhaustive enumeration needs n <= {max}, got n = {n}")]
    EnumerationBudget { n: usize, max: usize },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {delta}")]
    NotSymmetric { i: usize, j: usize, delta: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },

    #[error("malformed flip set: {0}")]
    MalformedFlipSet(String),

    #[error("operation defined for {expected} solutions, got {got}")]
    WrongSolutionKind {
        expected: &'static str,
        got: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
