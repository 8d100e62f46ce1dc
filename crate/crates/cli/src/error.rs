use std::fmt;
use std::process::ExitCode;

use mnls_core::Error;

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    CheckFailed(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Numerical(_) | CliError::CheckFailed(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidDimension(_)
            | Error::EvenPointCount(_)
            | Error::TooFewPoints(_)
            | Error::NonpositiveExtent(_)
            | Error::GridMismatch
            | Error::DimensionMismatch { .. }
            | Error::NotAntisymmetric(_)
            | Error::OffLatticeShift(_)
            | Error::InvalidExponent { .. }
            | Error::WindowOutsideReliableRegion { .. }
            | Error::FieldTooWeak(_)
            | Error::InvalidArgument(_) => CliError::Usage(msg),
            Error::NonFinite(_)
            | Error::ZeroField
            | Error::NonpositiveQuotient(_)
            | Error::BracketNotFound
            | Error::NonMonotoneProfile(_)
            | Error::NoConvergence { .. }
            | Error::MaxItersExceeded { .. }
            | Error::EnergyIncrease { .. }
            | Error::Breakdown => CliError::Numerical(msg),
            Error::Format(_) | Error::Io(_) | Error::Json(_) => CliError::Io(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
