//! Domain types and quality metrics for irregularly sampled Wi-Fi CSI.
//!
//! A [`CsiStream`] is an ordered list of [`PacketRecord`]s, each carrying a
//! timestamp, PHY metadata and a per-subcarrier amplitude vector. Streams are
//! stored as JSON Lines (see [`io`]), cut into fixed-duration windows
//! ([`window`]) and characterised by the MR/SCV/ACV metrics ([`metrics`]).

pub mod error;
pub mod io;
pub mod metrics;
pub mod types;
pub mod window;

pub use error::{CsiError, Result};
pub use metrics::{compute_acv, compute_mr, compute_scv, stream_mr, DEFAULT_MR_BIN_US};
pub use types::{
    Band, CanonicalGrid, ClusterKey, CsiStream, FrameType, PacketRecord, QualityMetrics,
    SanitizedWindow, SubcarrierGrids,
};
pub use window::{window_ranges, window_stream, StreamWindow, DEFAULT_WINDOW_US};
