//! Front end behind the `ringmod` binary: run configuration, sweeps, CSV
//! emission, figure presets, the self-check report and the β calculator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver error,
//! 4 convergence failure under `--strict`, 5 failed self-check.

pub mod config;
pub mod repro;
pub mod sweep;
pub mod verify;
pub mod voltage;

use crate::error::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_CONVERGENCE: u8 = 4;
pub const EXIT_VERIFY: u8 = 5;

/// A failure carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn io(err: std::io::Error) -> Self {
        Self::config(format!("i/o error: {err}"))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err.root() {
            Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
            _ => EXIT_SOLVER,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `{:.11e}`: twelve significant digits, identical bytes on every platform.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}
