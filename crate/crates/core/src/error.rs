use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("outside domain of validity: {0}")]
    Domain(String),

    /// Delta-function pulses have no pointwise value.
    #[error("ideal kicks cannot be evaluated pointwise ({0}); use the analytic kicked propagators")]
    UnsupportedEvaluation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
