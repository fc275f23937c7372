use std::path::PathBuf;

use copjoint_core::Error as CoreError;
use serde::Serialize;

/// Process exit codes.
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const VALIDATION: u8 = 3;
    pub const NUMERICAL: u8 = 4;
    pub const IO: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config {path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("malformed {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Serialize)]
struct Structured<'a> {
    kind: &'a str,
    exit_code: u8,
    message: String,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Config(_) | CliError::Toml { .. } | CliError::Json { .. } => exit::VALIDATION,
            CliError::Read { .. } | CliError::Write { .. } => exit::IO,
            CliError::Core(e) => match e {
                CoreError::Numerical(_)
                | CoreError::Training { .. }
                | CoreError::Consistency(_)
                | CoreError::Boundary(_) => exit::NUMERICAL,
                CoreError::Io(_) => exit::IO,
                _ => exit::VALIDATION,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            exit::USAGE => "usage",
            exit::NUMERICAL => "numerical",
            exit::IO => "io",
            _ => "validation",
        }
    }

    /// One-line JSON form for stderr.
    pub fn to_json(&self) -> String {
        let s = Structured {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        };
        serde_json::to_string(&s).unwrap_or_else(|_| self.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
