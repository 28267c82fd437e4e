use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("expected at least {min} equation-term columns, found {found}")]
    Dimensionality { found: usize, min: usize },

    #[error("at most {max} equation terms are supported, found {found}")]
    TooManyTerms { found: usize, max: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid weights: {0}")]
    Weights(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("need at least {needed} samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("unsupported sample geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("illegal hypothesis at row {row}: {reason}")]
    IllegalHypothesis { row: usize, reason: String },

    #[error("label {0} has no cluster hypothesis")]
    MissingHypothesis(i64),

    #[error("exhaustive selection over {terms} terms exceeds the ceiling of {ceiling}; use the sparse-pca selector")]
    ChsCeiling { terms: usize, ceiling: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("every grid point failed")]
    SweepFailed,
}

impl Error {
    /// Failures caused by the numbers themselves rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }

    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::Config(_) | Error::ChsCeiling { .. })
    }
}
