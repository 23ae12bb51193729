use core::fmt;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid parameters outside the supported range.
    InvalidGrid(&'static str),
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// Data length does not match the grid.
    LengthMismatch { expected: usize, got: usize },
    /// An argument outside its admissible range.
    InvalidArgument(&'static str),
    /// The k = 0 coefficient is too large for an operation that needs mean-zero input.
    NonZeroMean { mean: f64, scale: f64 },
    /// Ball radius outside `[1/n, 1/2]`.
    DeltaOutOfRange { delta: f64, min: f64, max: f64 },
    /// Field is identically zero where a non-zero field is required.
    ZeroField,
    /// The steepest-descent direction vanishes identically.
    Degenerate,
    /// Time step exceeds the CFL limit for the current velocity.
    CflViolation { dt: f64, limit: f64 },
    /// Time samples must be strictly increasing.
    NonMonotoneTime { last: f64, t: f64 },
    /// Too few samples to fit.
    InsufficientData { needed: usize, got: usize },
    /// A non-positive value where a logarithm is taken.
    NonPositiveValue { time: f64, value: f64 },
    /// The cost accumulator and bound parameters disagree on the exponent p.
    ParamMismatch { expected: f64, got: f64 },
    /// Algebraic floor evaluated at a non-positive cost.
    ZeroCost,
    /// Field does not vanish outside the unit cell interior.
    SupportViolation { value: f64 },
    /// Test-function annulus wraps around the torus.
    GeometryError { outer_radius: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::GridMismatch => write!(f, "fields live on different grids"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} values, got {got}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonZeroMean { mean, scale } => write!(
                f,
                "field mean {mean:e} is not negligible against field scale {scale:e}"
            ),
            Error::DeltaOutOfRange { delta, min, max } => {
                write!(f, "delta {delta} outside [{min}, {max}]")
            }
            Error::ZeroField => write!(f, "field is identically zero"),
            Error::Degenerate => write!(f, "steepest-descent direction vanishes"),
            Error::CflViolation { dt, limit } => {
                write!(f, "time step {dt:e} exceeds CFL limit {limit:e}")
            }
            Error::NonMonotoneTime { last, t } => {
                write!(f, "time {t} does not follow previous sample {last}")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            Error::NonPositiveValue { time, value } => {
                write!(f, "non-positive value {value:e} at t = {time}")
            }
            Error::ParamMismatch { expected, got } => {
                write!(f, "cost exponent p = {got} does not match bound exponent {expected}")
            }
            Error::ZeroCost => write!(f, "cost integral must be positive"),
            Error::SupportViolation { value } => write!(
                f,
                "field takes value {value:e} on the cell boundary; expected compact support"
            ),
            Error::GeometryError { outer_radius } => write!(
                f,
                "test function radius {outer_radius} exceeds half the torus period"
            ),
        }
    }
}

impl core::error::Error for Error {}
