use std::path::PathBuf;

/// Failures that stop a command before any check runs. All of them map to
/// exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Engine(#[from] catgal_core::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Engine errors that describe malformed input rather than a failed check.
pub fn is_input_error(e: &catgal_core::Error) -> bool {
    use catgal_core::Error::*;
    matches!(
        e,
        SchemaError(_)
            | InvalidGraph(_)
            | NotAGroup(_)
            | NotAHom(_)
            | IndexOutOfRange { .. }
            | OrderBound { .. }
            | NotSurjective(_)
            | NotEtale { .. }
            | CodMismatch
            | ParentMismatch
    )
}
