use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid transition kernel: {0}")]
    InvalidKernel(String),

    #[error("no cell has energy in the shell [{lower}, {upper}]")]
    EmptyShell { lower: f64, upper: f64 },

    #[error("kernel is not deterministic (not a permutation)")]
    NonDeterministicKernel,

    #[error("problem too large for exhaustive search: n = {n}, max = {max}")]
    TooLarge { n: usize, max: usize },

    #[error("epsilon {0} is outside the feasible range [0, 1]")]
    InfeasibleEpsilon(f64),

    #[error("geometric supports do not match within the Fubini-Study tolerance")]
    SupportMismatch,

    #[error("matrix is not unitary (max |U^dagger U - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("invalid driving protocol: {0}")]
    InvalidProtocol(String),

    #[error("time evolution did not converge: last refinement changed U by {change:e} at {steps} steps")]
    NotConverged { change: f64, steps: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}
