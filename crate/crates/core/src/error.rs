use thiserror::Error;

/// Errors raised by the groundstate laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: only 2 and 3 are supported")]
    InvalidDimension(usize),
    #[error("point count {0} is even; the origin must be a grid node")]
    EvenPointCount(usize),
    #[error("point count {0} is below the minimum of 33 per axis")]
    TooFewPoints(usize),
    #[error("half extent {0} must be positive and finite")]
    NonpositiveExtent(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("magnetic matrix is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),
    #[error("shift component {0} is not an integer multiple of the grid spacing")]
    OffLatticeShift(f64),
    #[error("operation undefined for the zero field")]
    ZeroField,
    #[error("exponent p = {p} is not admissible in dimension {dim}")]
    InvalidExponent { p: f64, dim: usize },
    #[error("quotient {0} must be positive")]
    NonpositiveQuotient(f64),
    #[error("shooting bracket for the radial groundstate not found")]
    BracketNotFound,
    #[error("radial profile is not strictly decreasing near r = {0}")]
    NonMonotoneProfile(f64),
    #[error("{what} did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("groundstate iteration exhausted {iterations} iterations (residual {residual:e})")]
    MaxItersExceeded { iterations: usize, residual: f64 },
    #[error("energy increased at iteration {iteration} even with the smallest step ({before} -> {after})")]
    EnergyIncrease {
        iteration: usize,
        before: f64,
        after: f64,
    },
    #[error("Krylov basis broke down repeatedly")]
    Breakdown,
    #[error("fit window [{lo}, {hi}] leaves the reliable region")]
    WindowOutsideReliableRegion { lo: f64, hi: f64 },
    #[error("field strength {0} is below the range of the 2d decay law; use the exponential law")]
    FieldTooWeak(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed field dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
