use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("missing artifact {}: run `l2boost simulate` first", .0.display())]
    MissingArtifact(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("estimation failed: {0}")]
    Estimation(#[from] l2boost_core::Error),
}

impl AppError {
    /// 2 for problems with the invocation or its inputs, 1 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Data(_) | AppError::MissingArtifact(_) => 2,
            AppError::Io { .. } | AppError::Estimation(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> AppError {
        let path = path.into();
        move |source| AppError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
