use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Solver(#[from] gradspace::Error),

    #[error("certificate rejected: {0}")]
    Rejected(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }

    /// 0 ok, 1 I/O, 2 infeasible, 3 no convergence or failed regularity,
    /// 4 malformed input, 5 rejected certificate.
    pub fn exit_code(&self) -> u8 {
        use gradspace::Error as E;
        match self {
            CliError::Io { .. } => 1,
            CliError::Schema(_) => 4,
            CliError::Rejected(_) => 5,
            CliError::Solver(e) => match e {
                E::Infeasible(_) => 2,
                E::NotConverged { .. } | E::RegularityViolation { .. } | E::Unbounded { .. } | E::Indefinite => 3,
                E::DimensionMismatch { .. } | E::InvalidInput(_) | E::Precondition(_) => 4,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
