use serde::{Deserialize, Serialize};
use unifi_core::FrameType;

use crate::error::{Result, SanitizeError};

/// Which cluster of an aligned pair serves as the amplitude reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignReference {
    /// The cluster with the lower missing rate.
    #[default]
    LowerMr,
    /// The cluster with more packets.
    MorePackets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SanitizeConfig {
    /// Outlier distance threshold on L2-normalized magnitudes.
    pub tau_d: f64,
    /// Burst threshold.
    pub t_b_us: i64,
    /// Coherence time for pairing packets across clusters.
    pub t_c_us: i64,
    /// Subcarrier budget per (band, bandwidth) grid; `None` disables ISS.
    pub k_sel: Option<usize>,
    pub enable_burst_filter: bool,
    pub enable_outlier_pruning: bool,
    pub enable_alignment: bool,
    /// Frame-type pairs whose preambles are compatible for alignment.
    pub compatible_frame_types: Vec<[FrameType; 2]>,
    pub align_reference: AlignReference,
}

impl Default for SanitizeConfig {
    fn default() -> Self {
        Self {
            tau_d: 0.6,
            t_b_us: 10_000,
            t_c_us: 1_000,
            k_sel: None,
            enable_burst_filter: true,
            enable_outlier_pruning: true,
            enable_alignment: true,
            compatible_frame_types: vec![[FrameType::Mgmt, FrameType::Ctrl]],
            align_reference: AlignReference::LowerMr,
        }
    }
}

impl SanitizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_d > 0.0) {
            return Err(SanitizeError::Arg(format!("tau_d = {} must be > 0", self.tau_d)));
        }
        if self.t_b_us < 0 {
            return Err(SanitizeError::Arg(format!("t_b_us = {} must be >= 0", self.t_b_us)));
        }
        if self.t_c_us <= 0 {
            return Err(SanitizeError::Arg(format!("t_c_us = {} must be > 0", self.t_c_us)));
        }
        if self.k_sel == Some(0) {
            return Err(SanitizeError::Arg("k_sel must be >= 1".into()));
        }
        Ok(())
    }

    pub fn compatible(&self, a: FrameType, b: FrameType) -> bool {
        a != b
            && self
                .compatible_frame_types
                .iter()
                .any(|&[x, y]| (x == a && y == b) || (x == b && y == a))
    }
}
