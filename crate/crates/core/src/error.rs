use thiserror::Error;

/// Errors produced by the simulator and the statistics harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid stadium length {0}: must be finite and > 0")]
    InvalidLength(f64),

    #[error("invalid phase point (r = {r}, theta = {theta})")]
    InvalidPhasePoint { r: f64, theta: f64 },

    /// Grazing flight or landing; the singular set has measure zero.
    #[error("degenerate collision at r = {r}, theta = {theta}")]
    GeometryDegenerate { r: f64, theta: f64 },

    /// A closed-form run exceeded the collision cap (period-2 vertical orbits).
    #[error("run of {run} collisions exceeds cap {cap}")]
    CapExceeded { run: u64, cap: u64 },

    #[error("point (r = {r}, theta = {theta}) is not in the induced set X")]
    NotInInducedSet { r: f64, theta: f64 },

    #[error("return-time band for n = {n} is empty")]
    Unreachable { n: u64 },

    #[error("n0 = {n0} is too small for the standard stopping time")]
    DomainTooSmall { n0: u64 },

    #[error("observable has |I| = {i} below tolerance; use the sqrt(n) regime")]
    ZeroI { i: f64 },

    #[error("observable carries no signal (I = 0)")]
    InsufficientSignal,

    #[error("confidence interval width {width} exceeds requested precision {precision}")]
    InsufficientSamples { width: f64, precision: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tabulated observable: {0}")]
    Table(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
