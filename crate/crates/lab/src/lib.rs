//! Command-line front end for `thinlevy`: configuration, artifact output,
//! run manifests and the invariant suite.

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;
pub mod suite;

use std::fmt;

/// Failure classes of a run; each maps to a process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum LabError {
    /// bad flags, config or arguments (exit 2)
    Usage(String),
    /// a numerical routine failed or a check did not hold (exit 1)
    Numerical(String),
    /// filesystem trouble (exit 1)
    Io(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) => 2,
            LabError::Numerical(_) | LabError::Io(_) => 1,
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Usage(m) => write!(f, "usage error: {m}"),
            LabError::Numerical(m) => write!(f, "numerical failure: {m}"),
            LabError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<thinlevy::Error> for LabError {
    fn from(e: thinlevy::Error) -> Self {
        match e {
            thinlevy::Error::Config(_) | thinlevy::Error::Domain { .. } => LabError::Usage(e.to_string()),
            other => LabError::Numerical(other.to_string()),
        }
    }
}
