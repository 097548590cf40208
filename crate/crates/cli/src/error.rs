use std::fmt;

/// A failure of the command, classified by its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: exit 1.
    Usage(String),
    /// Unreadable or invalid inputs: exit 2.
    Input(String),
    /// The analysis itself failed: exit 3.
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Analysis(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Analysis(m) => f.write_str(m),
        }
    }
}

impl From<rircoh::Error> for CliError {
    fn from(e: rircoh::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Analysis(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("writing CSV: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
