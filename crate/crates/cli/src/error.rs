use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Solver(#[from] phototherm::Error),

    #[error("{failed} of {total} acceptance checks failed")]
    Acceptance { failed: usize, total: usize },
}

impl CliError {
    /// 2 for bad input, 3 for solver failures, 4 for failed fixtures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } | CliError::Output { .. } => 2,
            CliError::Solver(phototherm::Error::InvalidParameter { .. })
            | CliError::Solver(phototherm::Error::CriticalIntensityOutOfRange { .. })
            | CliError::Solver(phototherm::Error::NoTaxisRoot { .. })
            | CliError::Solver(phototherm::Error::OutOfDomain(_)) => 2,
            CliError::Solver(_) => 3,
            CliError::Acceptance { .. } => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "invalid_config",
            3 => "solver_failure",
            _ => "acceptance_failure",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn write_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_failure_class() {
        let solver = CliError::Solver(phototherm::Error::NonConvergence {
            what: "oscillatory Newton",
            iterations: 50,
        });
        assert_eq!(solver.exit_code(), 3);
        assert_eq!(CliError::Acceptance { failed: 1, total: 10 }.exit_code(), 4);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(solver.to_json()["error"]["kind"], "solver_failure");
    }
}
