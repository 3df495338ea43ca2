use thiserror::Error;

pub type Result<T, E = SynthError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid configuration at {path}: {reason}")]
    Config { path: String, reason: String },

    #[error("cluster {cluster} uses a subcarrier layout not declared in the grids: {reason}")]
    Grid { cluster: String, reason: String },

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Csi(#[from] unifi_core::CsiError),
}

pub(crate) fn config_err(path: impl Into<String>, reason: impl Into<String>) -> SynthError {
    SynthError::Config {
        path: path.into(),
        reason: reason.into(),
    }
}
