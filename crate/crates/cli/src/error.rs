use std::fmt;

/// Failure of one invocation. The variant picks the exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad config, bad arguments or unreadable input.
    Validation(String),
    /// The numerics gave up (rank-deficient fit, empty normalization, ...).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn field(field: &str, reason: impl fmt::Display) -> Self {
        CliError::Validation(format!("`{field}`: {reason}"))
    }

    /// Prefixes the message with where it happened.
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<qsim_core::Error> for CliError {
    fn from(e: qsim_core::Error) -> Self {
        match e {
            qsim_core::Error::Io(io) => io.into(),
            e if e.is_validation() => CliError::Validation(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
