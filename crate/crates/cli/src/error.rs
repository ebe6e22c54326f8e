use thiserror::Error;

use crate::parse::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown symbol `{name}` at column {column}")]
    UnknownSymbol { name: String, column: usize },
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {message}")]
    Definition { line: usize, message: String },
    #[error(transparent)]
    Engine(#[from] qdiff::Error),
}

impl CliError {
    /// Rewriting that does not terminate or a derivation that gets stuck is
    /// a failed property (1); everything else is bad input (2).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(qdiff::Error::NonTerminating { .. } | qdiff::Error::Derivation { .. }) => 1,
            _ => 2,
        }
    }
}
