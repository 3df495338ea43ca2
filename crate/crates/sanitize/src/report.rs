use serde::{Deserialize, Serialize};
use unifi_core::{Band, ClusterKey, QualityMetrics};

use crate::config::SanitizeConfig;
use crate::iss::IssSelection;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub input_packets: usize,
    /// All-zero packets that could not be normalized.
    pub degenerate_dropped: usize,
    pub outliers_pruned: usize,
    pub burst_removed: usize,
    /// Packets from different clusters sharing a timestamp; the first in key
    /// order is kept.
    pub timestamp_collisions: usize,
    pub output_packets: usize,
    /// Rows left with no tone after subcarrier selection.
    pub iss_rows_dropped: usize,
    pub windows_emitted: usize,
    /// Windows that held raw packets but none after sanitization.
    pub windows_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// `CSI0`, `CSI1`, ... within the band.
    pub name: String,
    pub key: ClusterKey,
    pub packets_in: usize,
    pub packets_out: usize,
    pub degenerate_dropped: usize,
    pub outliers_pruned: usize,
    pub burst_removed: usize,
    /// On raw amplitudes.
    pub raw: QualityMetrics,
    /// After normalization and pruning, before alignment and burst removal.
    pub normalized: QualityMetrics,
    /// After every stage.
    pub sanitized: QualityMetrics,
    pub aligned_to: Option<ClusterKey>,
}

/// All clusters of one band taken together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub band: Band,
    pub raw: QualityMetrics,
    pub sanitized: QualityMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub src: ClusterKey,
    pub reference: ClusterKey,
    pub n_pairs: usize,
    pub gamma_mean: Option<f64>,
    /// Set when the pair could not be aligned and stays separate.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanitizeReport {
    pub config: SanitizeConfig,
    pub counts: StageCounts,
    pub clusters: Vec<ClusterReport>,
    pub bands: Vec<BandReport>,
    pub alignments: Vec<AlignmentSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iss: Option<IssSelection>,
}
