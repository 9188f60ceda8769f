use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("scale guard: {0}")]
    Scale(String),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("solver error: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 2,
            CliError::Config(_) => 3,
            CliError::Scale(_) => 4,
            CliError::Io { .. } | CliError::Solver(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<accessalloc::Error> for CliError {
    fn from(e: accessalloc::Error) -> Self {
        use accessalloc::Error as E;
        match e {
            E::InvalidParameter { .. } | E::LengthMismatch { .. } | E::NoWaste { .. } => {
                CliError::Config(e.to_string())
            }
            E::DegenerateSplit(_) => CliError::Data(e.to_string()),
            E::ScaleLimit { .. } => CliError::Scale(e.to_string()),
            E::LpFailure(_) => CliError::Solver(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
