use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("map iterate overflowed or left the escape region at step {step}")]
    Overflow { step: usize },
    #[error("degenerate projection: orbit point {index} coincides with the center")]
    DegenerateProjection { index: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("Fourier data is not conjugate symmetric (residual {residual:e})")]
    SymmetryViolation { residual: f64 },
    #[error("coefficient norms do not decay (fitted rate {rate:e})")]
    NonDecaying { rate: f64 },
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular linear system at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("Newton iteration diverged: defect {from:e} -> {to:e}")]
    Divergence { from: f64, to: f64 },
    #[error("unfolding parameter {name} = {value:e} did not vanish at the solution")]
    UnfoldingNonzero { name: &'static str, value: f64 },
    #[error("orbit is not quasiperiodic (spread {spread:e})")]
    NotQuasiperiodic { spread: f64 },
    #[error("initial guess defect {defect:e} above tolerance after retries")]
    InitialGuess { defect: f64 },
    #[error("periodic orbit is not elliptic (trace {trace})")]
    NotElliptic { trace: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
