use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or inconsistent inputs.
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] polarvos_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Core(e) if e.is_io() => 2,
            CliError::Core(_) => 1,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub(crate) fn unreadable(paths: &[PathBuf]) -> Self {
        let list: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
        CliError::Io(format!("unreadable files:\n  {}", list.join("\n  ")))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
