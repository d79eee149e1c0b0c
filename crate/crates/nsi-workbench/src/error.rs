//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x1}, {x2}) is outside the open half-plane x2 > 0")]
    OutsideHalfPlane { x1: f64, x2: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("margin {margin} empties the rectangle with sides {side1} x {side2}")]
    EmptySubset { margin: f64, side1: f64, side2: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("certification failed: clause `{clause}` at ({x1}, {x2}), margin {margin}")]
    Certification { clause: String, x1: f64, x2: f64, margin: f64 },

    #[error("requested accuracy {target} not reached (achieved {achieved})")]
    Accuracy { target: f64, achieved: f64 },

    #[error("evaluation on the singular circle (dx1, rho, s) = ({dx1}, {rho}, {s})")]
    Singularity { dx1: f64, rho: f64, s: f64 },

    #[error("field invariant violated: {0}")]
    Invariant(String),

    #[error("construction failed: {what} (witness ({x1}, {x2}), value {value})")]
    Construction { what: String, x1: f64, x2: f64, value: f64 },

    #[error("sizing: {0}")]
    Sizing(String),

    #[error("search exhausted after {iterations} halvings: {what}")]
    SearchExhausted { what: String, iterations: usize },

    #[error("combination condition fails at t = {time}: |u2| - |u1| = {excess} at ({x1}, {x2})")]
    Combination { time: f64, x1: f64, x2: f64, excess: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
