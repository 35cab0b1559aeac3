use std::path::PathBuf;

use blowup_core::BlowupError;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),

    #[error("config: {0}")]
    ConfigEcho(#[from] toml::ser::Error),

    #[error(transparent)]
    Core(#[from] BlowupError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 usage, 3 numerical or precondition failure, 4 internal abort.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Config(_) => 2,
            Self::Core(e) => match e {
                BlowupError::InvalidGrid(_)
                | BlowupError::InvalidArgument(_)
                | BlowupError::Unsupported(_)
                | BlowupError::Parse(_) => 2,
                BlowupError::Precondition(_) | BlowupError::Numerical(_) => 3,
                BlowupError::Io(_) | BlowupError::Csv(_) | BlowupError::Json(_) => 4,
            },
            Self::ConfigEcho(_) | Self::Io { .. } | Self::Csv(_) | Self::Json(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_class() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(BlowupError::InvalidArgument("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(BlowupError::Precondition("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(BlowupError::Numerical("x".into())).exit_code(), 3);
        let io = std::io::Error::other("disk");
        assert_eq!(CliError::Io { path: "a".into(), source: io }.exit_code(), 4);
    }
}
