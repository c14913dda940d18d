use thiserror::Error;

use crate::pure_circuit::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input {0}")]
    NonFinite(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point leaves the unit box at coordinate {index} (value {value})")]
    OutOfBox { index: usize, value: f64 },

    #[error("invalid Pure-Circuit instance ({} violations)", .0.len())]
    InvalidCircuit(Vec<Violation>),

    #[error("invalid LinVI instance: {0}")]
    InvalidLinVi(String),

    #[error("assignment covers {actual} vertices, instance has {expected}")]
    AssignmentNotTotal { expected: usize, actual: usize },

    #[error("{what} exceeds cap: {size} > {cap}")]
    CapExceeded {
        what: String,
        size: String,
        cap: String,
    },

    #[error("point is not {eps}-stationary (max violation {violation})")]
    NotStationary { eps: f64, violation: f64 },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
