use thiserror::Error;

use crate::quad::Endpoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponent out of range: {0}")]
    Exponent(String),

    #[error("quadrature could not classify the integral near {endpoint}: {diagnostic}")]
    Undetermined { endpoint: Endpoint, diagnostic: String },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("lift undefined: {0}")]
    Lift(String),

    #[error("ratio undefined: {0}")]
    Ratio(String),

    #[error("witness search failed: {0}")]
    SearchFailure(String),

    #[error("unsupported datum: {0}")]
    Unsupported(String),

    #[error("calibration integral diverges: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
