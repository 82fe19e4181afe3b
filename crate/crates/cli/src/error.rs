use std::fmt;

use interfere_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IDENTITY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn budget(message: impl Into<String>) -> Self {
        Self { code: EXIT_BUDGET, message: message.into() }
    }

    /// Wraps a library error, prefixing the flag it came from.
    pub fn core(flag: &str, err: Error) -> Self {
        let code = match err {
            Error::BudgetExceeded(_) | Error::SizeLimit { .. } | Error::Overflow(_) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Self { code, message: format!("{flag}: {err}") }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches the offending flag to library errors.
pub trait Flag<T> {
    fn flag(self, flag: &str) -> CliResult<T>;
}

impl<T> Flag<T> for interfere_core::Result<T> {
    fn flag(self, flag: &str) -> CliResult<T> {
        self.map_err(|e| CliError::core(flag, e))
    }
}
