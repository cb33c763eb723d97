use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Positivity observables need an even dimension, otherwise `I_x` has a zero eigenvalue.
    #[error("unsupported dimension d = {0}: the positivity operator requires even d")]
    UnsupportedDimension(usize),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("unsupported state: {0}")]
    UnsupportedState(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    /// The top eigenvalue is degenerate and its derivative is set-valued.
    #[error("gradient undefined: top eigenvalue gap {gap:.3e} below threshold")]
    GradientUndefined { gap: f64 },

    #[error("degenerate truncation: subspace weight {weight:.3e}")]
    DegenerateTruncation { weight: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the numbers rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalInconsistency(_)
                | Error::GradientUndefined { .. }
                | Error::DegenerateTruncation { .. }
        )
    }
}
