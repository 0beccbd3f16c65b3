use thiserror::Error;

/// Errors raised by the analysis, the oracles and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("poles {first} and {second} are closer than the relative separation {threshold:e}")]
    NearDegeneratePoles {
        first: f64,
        second: f64,
        threshold: f64,
    },

    #[error("numerical instability in {context}: value {value:e} outside its admissible range")]
    NumericalInstability { context: &'static str, value: f64 },

    #[error("infeasible power constraint: outage {outage:e} at vanishing power already exceeds threshold {threshold:e}")]
    Infeasible { outage: f64, threshold: f64 },

    #[error("quadrature did not converge: estimated error {error:e} after {subdivisions} subdivisions")]
    NonConvergence { error: f64, subdivisions: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
