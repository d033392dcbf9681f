//! One error type for the whole binary, convertible into the machine
//! readable object emitted on exit code 2.

use serde_json::json;
use thiserror::Error;

use qcsplab_core::clone::CloneError;
use qcsplab_core::dnf::DnfError;
use qcsplab_core::forge::ForgeError;
use qcsplab_core::io::IoError;
use qcsplab_core::model::ModelError;
use qcsplab_core::powers::PowersError;
use qcsplab_core::sentence::SentenceError;
use qcsplab_core::solver::SolveError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dnf(#[from] DnfError),
    #[error(transparent)]
    Sentence(#[from] SentenceError),
    #[error(transparent)]
    Format(#[from] IoError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Powers(#[from] PowersError),
    #[error(transparent)]
    Clone(#[from] CloneError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read",
            CliError::Write { .. } => "write",
            CliError::Usage(_) => "usage",
            CliError::Model(_) => "model",
            CliError::Dnf(_) => "dnf",
            CliError::Sentence(_) => "sentence",
            CliError::Format(_) => "format",
            CliError::Forge(_) => "forge",
            CliError::Solve(_) => "solve",
            CliError::Powers(_) => "powers",
            CliError::Clone(_) => "clone",
        }
    }

    pub fn error_object(&self) -> serde_json::Value {
        let path = match self {
            CliError::Read { path, .. } | CliError::Write { path, .. } => Some(path.clone()),
            _ => None,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "path": path,
            }
        })
    }
}
