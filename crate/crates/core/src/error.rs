use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation of U†U from I is {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("expectation value has imaginary part {imag:.3e}")]
    ComplexExpectation { imag: f64 },

    #[error("invalid charge label: {0}")]
    InvalidLabel(String),

    #[error("missing charge delta for label {0}")]
    MissingLabel(String),

    #[error("reconstructed matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositive { eigenvalue: f64 },

    #[error("battery containment violated: {0}")]
    Containment(String),

    #[error("channel is not trace preserving (max deviation of ΣK†K from I is {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures (battery leaving its grid, noisy reconstructions
    /// that are not physical) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Containment(_) | Error::NotPositive { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
