use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("curve is not regular at sample {index}: zero discrete speed")]
    NotRegular { index: usize },

    #[error("radius vanishes at interior sample {index}; surface is not immersed")]
    AxisContact { index: usize },

    #[error("curve does not meet the axis perpendicularly at its {end} end (slope ratio {ratio:.3e})")]
    NotPerpendicular { end: &'static str, ratio: f64 },

    #[error("tangent angle jumps by {jump:.3} rad between samples {index} and {next}; refine the curve", next = .index + 1)]
    RefinementRequired { index: usize, jump: f64 },

    #[error("quadrature error estimate {estimate:.3e} exceeds tolerance {tol:.3e}; refine the grid")]
    Unresolved { estimate: f64, tol: f64 },

    #[error("evaluation outside the domain: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("flow step failed after {retries} retries at t={time:.6e}")]
    StepFailure { retries: usize, time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
        Error::Parse { line, msg: e.to_string() }
    }
}
