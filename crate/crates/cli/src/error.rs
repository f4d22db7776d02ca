use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Core(bathforge::Error),
    Usage(String),
    Config(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Reproducibility(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<bathforge::Error> for CliError {
    fn from(e: bathforge::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Reproducibility(_) => "reproducibility",
        }
    }

    fn parameter(&self) -> Option<&str> {
        match self {
            CliError::Core(bathforge::Error::InvalidParameter { name, .. }) => Some(name),
            CliError::Core(bathforge::Error::AtAlpha { source, .. }) => match source.as_ref() {
                bathforge::Error::InvalidParameter { name, .. } => Some(name),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Reproducibility(_) => 5,
            CliError::Core(bathforge::Error::Io(_)) => 4,
            CliError::Core(bathforge::Error::Config(_)) => 2,
            CliError::Core(_) => 3,
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            parameter: Option<&'a str>,
            message: String,
        }
        serde_json::to_string(&Report {
            error: self.category(),
            parameter: self.parameter(),
            message: self.to_string(),
        })
        .expect("error reports always serialize")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Config(m) | CliError::Reproducibility(m) => {
                f.write_str(m)
            }
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}
