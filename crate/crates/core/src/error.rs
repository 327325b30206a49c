//! Error type shared by every stage of the pipeline.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polynomial of degree {0} is not supported (maximum is 3)")]
    UnsupportedDegree(usize),

    #[error("denominator is identically zero")]
    ZeroDenominator,

    #[error("leading coefficient vanishes at x = {x}")]
    SingularStep { x: Complex64 },

    #[error("degenerate recurrence: {0}")]
    DegenerateRecurrence(String),

    #[error("pole of order {order} at t = {pole} in the logarithmic derivative")]
    UnsupportedPoleOrder { pole: Complex64, order: usize },

    #[error("evaluation at or too near the singular point t = {0}")]
    Singularity(Complex64),

    #[error("no integral representation: {0}")]
    NoRepresentation(String),

    #[error("path planning failed: {0}")]
    PathPlanning(String),

    #[error("integrand overflow on path segment {segment}: {detail}")]
    PathFailure { segment: usize, detail: String },

    #[error("quadrature did not converge (best value {value}, error estimate {error:e})")]
    NotConverged { value: Complex64, error: f64 },

    #[error("x = {x} lies outside the window [{min}, {max}]")]
    OutOfWindow { x: Complex64, min: f64, max: f64 },

    #[error("normalization integral vanishes (|I(x0)| = {magnitude:e})")]
    DegenerateNormalization { magnitude: f64 },

    #[error("every endpoint pair failed: {}", .0.join("; "))]
    NoValidRepresentation(Vec<String>),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}
