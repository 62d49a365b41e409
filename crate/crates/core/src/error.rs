use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("GPD fit failed: {0}")]
    FitFailure(String),

    #[error("predictor {spec} infeasible on training sample of size {n_train}")]
    SpecInfeasible { spec: String, n_train: usize },

    #[error("infeasible cross-validation plan: {0}")]
    InfeasiblePlan(String),

    #[error("invalid model specification: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
