use thiserror::Error;
use unifi_core::ClusterKey;

pub type Result<T, E = SanitizeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SanitizeError {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("cluster is empty")]
    EmptyCluster,

    #[error("no packet pairs within the coherence time between {src} and {reference}")]
    NoPairs { src: ClusterKey, reference: ClusterKey },

    #[error("every matched pair between {src} and {reference} has a zero reference amplitude")]
    DivByZero { src: ClusterKey, reference: ClusterKey },

    #[error("{src} and {reference} share no subcarriers")]
    NoSharedSubcarriers { src: ClusterKey, reference: ClusterKey },

    #[error("invalid argument: {0}")]
    Arg(String),

    #[error(transparent)]
    Csi(#[from] unifi_core::CsiError),
}
