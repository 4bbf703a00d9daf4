use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: usize, right: usize },

    #[error("domain length mismatch: {left} vs {right}")]
    LengthMismatch { left: f64, right: f64 },

    #[error("grid resolution {0} must be even and at least 4")]
    BadResolution(usize),

    #[error("numerical divergence at t = {time}: {what}")]
    Diverged { time: f64, what: String },

    #[error("trace diverges: exponent {exponent} <= 1 with all modes observed")]
    DivergentTrace { exponent: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible step grids: {0}")]
    IncompatibleSteps(String),

    #[error("length mismatch: {left} samples vs {right} samples")]
    SeriesMismatch { left: usize, right: usize },

    #[error("empty series")]
    EmptySeries,

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
