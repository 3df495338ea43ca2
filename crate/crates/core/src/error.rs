use thiserror::Error;

pub type Result<T, E = CsiError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CsiError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A stream file row that does not match the schema. Lines are 1-based,
    /// the header being line 1.
    #[error("schema error on line {line}: {reason}")]
    Schema { line: usize, reason: String },

    #[error("ordering error on line {line}: {reason}")]
    Order { line: usize, reason: String },

    #[error("invalid argument: {0}")]
    Arg(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("subcarrier grid error: {0}")]
    Grid(String),

    #[error("invalid window: {0}")]
    Window(String),
}
