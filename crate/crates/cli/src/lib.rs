//! Experiment driver for the mkpls pipeline: dataset synthesis, feature
//! extraction, parameterization, Gram assembly and protocol evaluation.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod report;

use std::fmt;

/// CLI-level errors carry the process exit code: 2 for configuration
/// problems, 3 for data problems, 4 for numerical failures.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(mkpls::Error),
    Numerical(mkpls::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Data(e) => write!(f, "data error: {e}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

fn is_numerical(e: &mkpls::Error) -> bool {
    match e {
        mkpls::Error::Singular { .. } => true,
        mkpls::Error::KernelPair { source, .. } => is_numerical(source),
        _ => false,
    }
}

impl From<mkpls::Error> for CliError {
    fn from(e: mkpls::Error) -> Self {
        if is_numerical(&e) {
            CliError::Numerical(e)
        } else {
            CliError::Data(e)
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
