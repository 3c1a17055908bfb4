use std::fmt;

use lindblad_calib::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const INCONSISTENT: i32 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(exit::CONFIG, message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(exit::INPUT, message)
    }

    pub fn from_core_config(e: Error) -> Self {
        Self::config(e.to_string())
    }

    pub fn from_core_input(e: Error) -> Self {
        Self::input(e.to_string())
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::new(exit::FAILURE, format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => exit::CONFIG,
            Error::RecordMismatch(_)
            | Error::DimensionMismatch { .. }
            | Error::NothingToCompare
            | Error::MissingCoupling(..)
            | Error::Parse(_)
            | Error::InvalidProbabilities(_)
            | Error::IncompleteCalibration { .. }
            | Error::MitigationUnreliable { .. } => exit::INPUT,
            _ => exit::FAILURE,
        };
        Self::new(code, e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
