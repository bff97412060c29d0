use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("NaN input")]
    NotANumber,
    #[error("least-squares fit is underdetermined: {basis} basis functions, {observations} observations")]
    Underdetermined { basis: usize, observations: usize },
    #[error("operator adjoint test failed: |<Ax,y> - <x,A^H y>| = {mismatch:e}")]
    AdjointMismatch { mismatch: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed filter bank file: {0}")]
    BankFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the user-supplied configuration rather
    /// than by I/O or a numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidArgument(_))
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}
