use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inverse did not converge for target {target}: residual {residual:e} after {iterations} iterations")]
    ConvergenceFailure {
        target: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("lift is not strictly increasing: minimum slope {min_slope} at angle {at}")]
    MonotonicityViolation { min_slope: f64, at: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("polar chart is degenerate at the center (t = {t})")]
    DegenerateAtCenter { t: f64 },
    #[error("non-radial state reached the center guard band at s = {s} (t = {t}, vtheta = {vtheta}); reduce the step size")]
    CenterSingularity { s: f64, t: f64, vtheta: f64 },
    #[error("event bisection failed at s = {s}: {reason}")]
    EventBisectionFailure { s: f64, reason: &'static str },
    #[error("trace horizon of {legs} legs is too short for period {period} (needs {needed})")]
    HorizonTooShort {
        legs: usize,
        period: usize,
        needed: usize,
    },
    #[error("section starting at {theta} is not closed within the searched horizon")]
    NotClosed { theta: f64 },
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("exact arithmetic overflowed computing {0}")]
    Overflow(&'static str),
    #[error("scan sample {index} (theta = {theta}): {source}")]
    ScanSample {
        index: usize,
        theta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Strips scan-sample context.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::ScanSample { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
