use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    /// Parse failures and `--help`/`--version` output from clap.
    #[error("{0}")]
    Clap(clap::Error),

    #[error("i/o: {0}")]
    Io(String),

    #[error(transparent)]
    Run(#[from] freegrad_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Clap(e) => e.exit_code(),
            CliError::Io(_) | CliError::Run(_) => 1,
        }
    }
}

pub(crate) fn io_err(what: &str, path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{what} {}: {e}", path.display()))
}
