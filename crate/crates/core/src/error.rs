use thiserror::Error;

/// Failure modes of the homogenization pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("frequency module detection failed: {0}")]
    ModuleDetection(String),
    #[error("degenerate winding matrix: {0}")]
    DegenerateWinding(String),
    #[error("lift mismatch: {0}")]
    LiftMismatch(String),
    #[error("coefficient is not coercive: minimum eigenvalue estimate {estimate:e}")]
    CoercivityViolation { estimate: f64 },
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("degenerate finite-difference stencil: {0}")]
    DegenerateStencil(String),
    #[error("gradient of the first Bloch eigenvalue at 0 has norm {norm:e} > {tol:e}")]
    CriticalityViolation { norm: f64, tol: f64 },
    #[error("delta continuation failed: {0}")]
    ContinuationFailure(String),
    #[error("quasimomentum {0:?} lies outside [-1/2, 1/2)^d")]
    OutOfZone(Vec<f64>),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
