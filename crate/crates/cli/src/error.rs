use std::fmt;

use nhphase_core::Error;

/// Failure classes of the command line, one per exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Resonance(String),
    Parse(String),
    /// Numerical failure on valid input (degenerate spectrum, blow-up, ...).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Resonance(_) => 4,
            CliError::Parse(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Resonance(m) => write!(f, "resonance: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::InvalidParameter { .. } | Error::InvalidMode { .. } | Error::StepCountTooSmall { .. } => {
                CliError::Validation(e.to_string())
            }
            Error::Resonance { .. } => CliError::Resonance(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
