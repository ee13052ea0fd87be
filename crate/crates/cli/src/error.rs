use thiserror::Error;

/// Errors surfaced by the command-line tool, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input, invalid graphs.
    #[error("{0}")]
    Input(String),
    /// The analysis itself failed (overflow, path explosion, oracle mismatch).
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn input(msg: impl ToString) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn analysis(msg: impl ToString) -> Self {
        CliError::Analysis(msg.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Analysis(_) => 2,
        }
    }

    /// Single-line message for the error stream.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error: {}", msg.trim())
    }
}
