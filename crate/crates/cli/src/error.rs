use std::fmt;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_EXECUTION: u8 = 3;
pub const EXIT_ANALYSIS: u8 = 4;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl CliError {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        CliError {
            code,
            error: error.into(),
        }
    }

    pub fn validation(msg: impl fmt::Display) -> Self {
        CliError::new(EXIT_VALIDATION, anyhow::anyhow!("{msg}"))
    }

    pub fn analysis(msg: impl fmt::Display) -> Self {
        CliError::new(EXIT_ANALYSIS, anyhow::anyhow!("{msg}"))
    }
}

pub trait OrExit<T> {
    fn or_exit(self, code: u8) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(code, e))
    }
}
