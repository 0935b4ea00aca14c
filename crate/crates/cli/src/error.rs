use thiserror::Error;
use vlmc::VlmcError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("could not parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] VlmcError),
}

impl CliError {
    /// 2 for anything wrong with the configuration, 3 for numerical
    /// failures during a run, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            CliError::Core(VlmcError::Usage(_) | VlmcError::Capability(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
