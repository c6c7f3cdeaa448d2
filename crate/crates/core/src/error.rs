use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("slope fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("slope fit abscissae must be strictly increasing (index {0})")]
    NonIncreasingAbscissae(usize),

    #[error("precoder design infeasible: {0}")]
    Infeasible(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("{resampled} degenerate draws exceed the resampling budget of {budget}")]
    ResampleBudgetExceeded { resampled: usize, budget: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
