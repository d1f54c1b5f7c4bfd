use thiserror::Error;

/// Exit statuses of the command line tool.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CONTAMINATION: i32 = 3;
}

#[derive(Debug, Error)]
pub enum LabError {
    /// The configuration does not validate; `path` names the offending key.
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    /// Wrap-around contamination left too few samples to run the suite.
    #[error("numerical contamination: {0}")]
    Contamination(String),
    #[error(transparent)]
    Numerics(dispersive_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report serialization: {0}")]
    Serialize(String),
}

impl LabError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } => exit::CONFIG,
            LabError::Contamination(_) => exit::CONTAMINATION,
            _ => exit::FAIL,
        }
    }
}

impl From<dispersive_core::Error> for LabError {
    fn from(e: dispersive_core::Error) -> Self {
        match e {
            dispersive_core::Error::InsufficientWindow { .. } => LabError::Contamination(e.to_string()),
            other => LabError::Numerics(other),
        }
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
