use std::fmt;

/// Why a command stopped, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or room document. Exit code 2.
    Config(String),
    /// A validation tolerance was exceeded. Exit code 3.
    Validation(String),
    /// Anything else, e.g. an unwritable output directory. Exit code 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<shoebox::Error> for Failure {
    fn from(e: shoebox::Error) -> Self {
        match e {
            shoebox::Error::Domain { .. } | shoebox::Error::Config(_) | shoebox::Error::Json(_) => {
                Failure::Config(e.to_string())
            }
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
