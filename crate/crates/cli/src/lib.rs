//! Command implementations behind the `abflux` binary.

pub mod commands;
pub mod config;

use std::fmt;
use std::io;

pub use config::{parse_config, ConfigError, ScenarioConfig};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Compute(abflux::Error),
    Io(io::Error),
    /// One or more verification checks failed.
    Acceptance(usize),
}

impl CliError {
    /// 2 config, 3 numerical convergence, 4 acceptance failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(abflux::Error::Convergence { .. } | abflux::Error::Instability { .. }) => 3,
            CliError::Compute(_) => 2,
            CliError::Io(_) => 1,
            CliError::Acceptance(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Compute(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Acceptance(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<abflux::Error> for CliError {
    fn from(e: abflux::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}
