use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the model's domain.
    #[error("invalid {field}: {reason}")]
    Domain { field: String, reason: String },

    #[error("insufficient dynamic range: decay reaches {reached_db:.1} dB but the fit needs {required_db:.1} dB")]
    InsufficientRange { reached_db: f64, required_db: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}

impl Error {
    pub(crate) fn domain(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
