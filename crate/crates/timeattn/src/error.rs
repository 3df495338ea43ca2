use thiserror::Error;

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("window has no observations")]
    EmptyWindow,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Arg(String),

    #[error("non-finite {what}")]
    NonFinite { what: String },

    /// Training diverged; carries the parameters after the last finite epoch.
    #[error("training diverged at epoch {epoch}: non-finite {what}")]
    Diverged {
        epoch: usize,
        what: String,
        last_good: Box<crate::params::ModelParams>,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
