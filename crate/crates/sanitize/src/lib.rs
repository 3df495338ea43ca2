//! Turns a raw heterogeneous CSI stream into model-ready windows.
//!
//! Stages run in a fixed order: metadata clustering ([`cluster_by_meta`]),
//! per-packet L2 normalization with waveform outlier pruning
//! ([`normalize_l2`], [`prune_outliers`]), amplitude alignment between
//! compatible clusters ([`align_clusters`]), burst thinning
//! ([`filter_bursts`]) and optional individual subcarrier selection
//! ([`select_subcarriers`]). [`sanitize_pipeline`] composes them.

mod align;
mod burst;
mod cluster;
mod config;
mod error;
mod iss;
mod normalize;
mod pipeline;
mod report;

pub use align::{align_clusters, apply_alignment, AlignmentMap, ClusterSeries};
pub use burst::filter_bursts;
pub use cluster::{cluster_by_meta, Cluster};
pub use config::{AlignReference, SanitizeConfig};
pub use error::{Result, SanitizeError};
pub use iss::{motion_statistic, select_subcarriers, subband_sizes, IssSelection};
pub use normalize::{normalize_l2, prune_outliers};
pub use pipeline::{
    build_window, prepare, sanitize_pipeline, PreparedStream, SanitizedPacket, UNLABELED,
};
pub use report::{AlignmentSummary, BandReport, ClusterReport, SanitizeReport, StageCounts};
