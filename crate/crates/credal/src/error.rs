use std::io;
use std::path::PathBuf;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] credal_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(
                credal_core::Error::ConfigInvalid(_)
                | credal_core::Error::InvalidSpace(_)
                | credal_core::Error::ImpossibleHistory(_),
            ) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } | CliError::Json { .. } | CliError::Csv(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(credal_core::Error::ConfigInvalid("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(credal_core::Error::ZeroEvidence).exit_code(), 3);
        assert_eq!(CliError::from(credal_core::Error::AllMembersZero).exit_code(), 3);
    }
}
