use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}, line {line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad parameter file: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] ifdist::Error),
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(ifdist::Error::NonConvergence { .. } | ifdist::Error::Numeric(_)) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let stalled = ifdist::Error::NonConvergence {
            message: "stalled".into(),
            trace: vec![],
        };
        assert_eq!(CliError::Core(stalled).exit_code(), 3);
        assert_eq!(
            CliError::Core(ifdist::Error::Numeric("singular".into())).exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(ifdist::Error::UnknownModel("x".into())).exit_code(),
            2
        );
        assert_eq!(CliError::Invalid("bad".into()).exit_code(), 2);
    }
}
