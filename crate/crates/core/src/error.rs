use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: need at least 2 levels")]
    InvalidDimension(usize),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density matrix trace is {0}, expected 1")]
    Trace(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("generator is not unital (|L[1]| = {0:e}); reduced form unavailable")]
    NonUnital(f64),

    #[error("schedule evaluated at s = {0}, outside [0, 1]")]
    Domain(f64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("branch matching is ambiguous near s = {s}; refine the grid")]
    Resolution { s: f64 },

    #[error("no non-vanishing gap on this schedule")]
    NoValidGap,

    #[error("gap collapsed at s = {s} (|G| = {gap:e})")]
    GapCollapse { s: f64, gap: f64 },

    #[error("stationary schedule at s = {0}: the generator does not change")]
    InfiniteSpeed(f64),

    #[error("drive metric is singular; drives are degenerate or stationary")]
    DegenerateDrive,

    #[error("shooting failed after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("trajectory reached a singular point near s = {s}")]
    SingularPath { s: f64 },

    #[error("step size underflow at t = {t}; problem too stiff for the tolerance")]
    Stiffness { t: f64 },

    #[error("singular parameter choice: {0}")]
    SingularParameter(String),

    #[error("spectrum is defective (eigenvector condition {0:e})")]
    Defective(f64),

    #[error("target infidelity {target:e} not reached for tau <= {tau_max}")]
    Unreachable { target: f64, tau_max: f64 },

    #[error("model file: {0}")]
    ModelFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Input errors are caller mistakes; everything else, including parameters
    /// that land on a guarded singularity, is a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_)
                | Error::Shape { .. }
                | Error::InvalidParameter(_)
                | Error::Trace(_)
                | Error::InvalidState(_)
                | Error::Domain(_)
                | Error::ModelFile(_)
        )
    }
}
