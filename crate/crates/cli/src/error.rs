use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error(transparent)]
    Core(#[from] ppl_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 for configuration and domain errors, 3 for resource caps, 4 for
    /// numeric failures, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        use ppl_core::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(E::Domain(_)) => 2,
            CliError::Core(E::ResourceCap(_)) => 3,
            CliError::Core(E::NonConvergence { .. } | E::RootBracket(_) | E::Numeric(_)) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
