use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The drift has an eigenvalue with non-negative real part, so no steady
    /// state exists. Carries the spectral abscissa.
    #[error("unstable dynamics: spectral abscissa {abscissa:.6e} >= 0")]
    UnstableDynamics { abscissa: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("singular limit: {0}")]
    SingularLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
