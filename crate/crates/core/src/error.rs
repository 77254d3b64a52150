use core::fmt;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    Domain { what: &'static str, value: f64 },
    /// A scenario or pattern parameter violates its invariant.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// Adaptive quadrature did not reach the requested tolerance.
    Quadrature { estimate: f64, abs_error: f64 },
    /// The bearing between two coincident points was requested.
    UndefinedBearing,
    /// The quantity is not defined for the given inputs.
    Undefined(&'static str),
    /// An operation needs a different beam-pattern variant.
    PatternMismatch(&'static str),
}

impl Error {
    /// Best available estimate carried by a quadrature failure.
    pub fn best_estimate(&self) -> Option<f64> {
        match self {
            Error::Quadrature { estimate, .. } => Some(*estimate),
            _ => None,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what}: argument {value} out of domain"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid parameter {name}: {reason}"),
            Error::Quadrature { estimate, abs_error } => write!(
                f,
                "quadrature did not converge (estimate {estimate:e}, error {abs_error:e})"
            ),
            Error::UndefinedBearing => f.write_str("undefined bearing between coincident points"),
            Error::Undefined(what) => write!(f, "undefined: {what}"),
            Error::PatternMismatch(what) => write!(f, "pattern mismatch: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
