use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("model violates its invariants: {0}")]
    Model(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("Kalman filter degenerate at t={t}: innovation variance {f:e}")]
    FilterDegenerate { t: usize, f: f64 },

    #[error("optimizer did not converge after {iterations} iterations (best objective {best_value})")]
    Convergence {
        iterations: usize,
        best_point: Vec<f64>,
        best_value: f64,
    },

    #[error("order selection failed for every candidate: {}", .failures.join("; "))]
    Selection { failures: Vec<String> },

    #[error("ingestion error: {0}")]
    Ingest(String),

    #[error("unknown generator '{name}'; available: {}", .available.join(", "))]
    UnknownGenerator { name: String, available: Vec<String> },
}

pub type Result<T> = std::result::Result<T, Error>;
