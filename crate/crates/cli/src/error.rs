use std::path::PathBuf;
use thiserror::Error;

/// Everything the binary can fail with, carrying enough structure to pick
/// the exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] latref::Error),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("failed to write {path}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("subcommand '{subcommand}' needs input '{key}', which the manifest does not provide")]
    MissingInput {
        subcommand: &'static str,
        key: &'static str,
    },
}

pub type CliResult<T> = Result<T, CliError>;

/// Exit code contract: 0 success, 2 usage, 3 data, 4 degenerate statistics.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Core(latref::Error::Parameter(_)) => 2,
        CliError::Core(latref::Error::DegenerateStatistics(_)) => 4,
        CliError::Core(_) => 3,
        CliError::Manifest { .. } => 3,
        CliError::Output { .. } => 3,
        CliError::MissingInput { .. } => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_the_contract() {
        assert_eq!(exit_code(&CliError::Usage("x".into())), 2);
        assert_eq!(exit_code(&CliError::Core(latref::Error::Parameter("p".into()))), 2);
        assert_eq!(
            exit_code(&CliError::Core(latref::Error::DegenerateStatistics("d".into()))),
            4
        );
        assert_eq!(exit_code(&CliError::Core(latref::Error::Dimension("d".into()))), 3);
        assert_eq!(
            exit_code(&CliError::Manifest { path: "m.json".into(), reason: "bad".into() }),
            3
        );
    }
}
