use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid sweep specification:\n  {}", .0.join("\n  "))]
    InvalidSpec(Vec<String>),

    #[error(transparent)]
    Model(#[from] tswipt_core::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::InvalidSpec(_) => 2,
            CliError::Model(_) | CliError::Output(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
