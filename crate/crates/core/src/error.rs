use thiserror::Error;

/// Errors raised by the solver stages.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no admissible downstream state: {0}")]
    NoAdmissibleState(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("inversion error: {0}")]
    Inversion(String),
    #[error("solvability error: compatibility residual {residual:e} exceeds {tolerance:e}")]
    Solvability { residual: f64, tolerance: f64 },
    #[error("step-size error: {0}")]
    Step(String),
    #[error("marching error: {0}")]
    Marching(String),
    #[error("no sign change of the solvability functional in the bracket (samples {samples:?})")]
    SolvabilityRoot { samples: Vec<(f64, f64)> },
    #[error("non-contraction after {iterations} iterations (last ratios {ratios:?})")]
    NonContraction { iterations: usize, ratios: Vec<f64> },
    #[error("iterate left the admissible ball: distance {distance:e} > radius {radius:e}")]
    BallExit { distance: f64, radius: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
