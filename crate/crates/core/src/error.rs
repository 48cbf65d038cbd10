use std::path::PathBuf;

use thiserror::Error;

use crate::morphology::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid configuration: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("unknown preset {0:?}; valid presets are GAS+SOL, SOL, GAS")]
    UnknownPreset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simulation fault at t = {time:.4} s: {message}")]
    SimulationFault { time: f64, message: String },

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error("insufficient gait cycles: found {found}, need at least {needed}")]
    InsufficientCycles { found: usize, needed: usize },

    #[error("schema mismatch in {path}: expected version {expected}, found {found}")]
    SchemaMismatch {
        path: String,
        expected: u32,
        found: String,
    },

    #[error("malformed log {path}: {message}")]
    MalformedLog { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
