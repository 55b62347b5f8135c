//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter violates its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configuration value (integrator, sweep, plot) is out of range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The Jacobian is undefined at the exact origin.
    #[error("jacobian undefined at the origin; use boundary-limit analysis")]
    OriginSingularity,

    /// An operation was called outside its domain (e.g. an interior-only
    /// quantity requested at a boundary state).
    #[error("domain error: {0}")]
    Domain(String),

    /// The predator-level expression v(u) has a pole at this u.
    #[error("pole in v(u) at u = {u}: denominator d - alpha*u*(c-d) vanishes")]
    Pole { u: f64 },

    /// Bisection was asked to work on a bracket without a sign change.
    #[error("no sign change over [{lo}, {hi}]: value {f_lo:e} at lo, {f_hi:e} at hi")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The tracked equilibrium disappeared inside a bisection bracket.
    #[error("tracked equilibrium lost inside bracket; fold suspected near parameter value {fold_estimate}")]
    EquilibriumLost { fold_estimate: f64 },

    /// The adaptive integrator could not meet its tolerance with any
    /// representable step.
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// A derivative evaluation produced a non-finite value.
    #[error("non-finite derivative at (u, v) = ({u}, {v})")]
    NonFinite { u: f64, v: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 numeric, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::InvalidConfig(_) | Error::Parse(_) => 2,
            Error::Io(_) | Error::Json(_) => 4,
            _ => 3,
        }
    }
}
