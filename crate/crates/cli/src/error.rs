use std::path::PathBuf;

use polarity_core::Error as ModelError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("no homogeneous equilibrium with u + v < 1")]
    NoEquilibrium,
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
        CliError::Io { path: path.into(), source }
    }

    /// Model errors that stem from the inputs alone count as config errors.
    fn is_config(&self) -> bool {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => true,
            CliError::Model(e) => matches!(
                e,
                ModelError::InvalidConfig(_)
                    | ModelError::InvalidOrder { .. }
                    | ModelError::InvalidSearchRange(_)
                    | ModelError::InfiniteDiffusion
                    | ModelError::UnitViolation(_)
                    | ModelError::Domain { .. }
            ),
            _ => false,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 4,
            e if e.is_config() => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse_error",
            CliError::Validation(_) => "validation_error",
            CliError::Io { .. } => "io_error",
            e if e.is_config() => "config_error",
            _ => "numerical_failure",
        }
    }

    /// `error kind=<kind> exit=<code>: <message>` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error kind={} exit={}: {}", self.kind(), self.exit_code(), msg)
    }
}
