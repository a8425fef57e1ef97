use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("winding ambiguity: residual {residual:.3e} (largest step {max_step:.3})")]
    Ambiguity { residual: f64, max_step: f64 },

    #[error("point lies within {distance:.3e} of the curve (tolerance {tolerance:.3e})")]
    Proximity { distance: f64, tolerance: f64 },

    #[error("step {m}: |w| = {modulus} outside validity radius {limit}")]
    Region { m: u64, modulus: f64, limit: f64 },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("inconsistent construction: {0}")]
    Inconsistent(String),

    #[error("insufficient data: need {needed}, have {have}")]
    InsufficientData { needed: usize, have: usize },

    #[error("nonpositive value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("unknown identifier `{0}`")]
    UnknownId(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
