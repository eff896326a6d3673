//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point too close to the boundary of slice {slice}: distance {dist:.3e} < required standoff {required:.3e}")]
    NearBoundary {
        slice: usize,
        dist: f64,
        required: f64,
    },

    #[error("no interior grid point survives spacing {spacing} with standoff {standoff}")]
    EmptyGrid { spacing: f64, standoff: f64 },

    #[error("cell budget {budget} exhausted; achieved error estimate {achieved:.3e} > requested {requested:.3e}")]
    BudgetExhausted {
        budget: usize,
        achieved: f64,
        requested: f64,
    },

    #[error("degenerate parametrization: |derivative| = {speed:.3e} at node {node}")]
    DegenerateParametrization { node: usize, speed: f64 },

    #[error("form is not dbar-closed: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotClosed { residual: f64, tol: f64 },

    #[error("alpha must lie in the open interval (0,1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code: 1 usage, 2 verification/trend failure, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownName(_) | Error::InvalidAlpha(_) | Error::InvalidInput(_)
            | Error::Config(_) => 1,
            Error::NotClosed { .. } => 2,
            Error::NearBoundary { .. }
            | Error::EmptyGrid { .. }
            | Error::BudgetExhausted { .. }
            | Error::DegenerateParametrization { .. }
            | Error::InvalidCurve(_)
            | Error::Io(_) => 3,
        }
    }
}
