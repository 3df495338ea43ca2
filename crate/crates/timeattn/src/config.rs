use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Time embedding width.
    pub d_r: usize,
    /// Value embedding width.
    pub d_h: usize,
    pub d_k: usize,
    pub d_v: usize,
    /// Number of reference times.
    pub q_refs: usize,
    pub n_heads: usize,
    pub gru_hidden: usize,
    pub n_classes: usize,
    /// Canonical subcarrier grid size `G`.
    pub grid_size: usize,
    /// Ablation: feed the mask bits to the encoder as extra inputs.
    pub use_mask_features: bool,
    /// Ablation switch: with `false`, keys depend on time only.
    pub content_aware_keys: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            d_r: 64,
            d_h: 64,
            d_k: 64,
            d_v: 64,
            q_refs: 64,
            n_heads: 1,
            gru_hidden: 64,
            n_classes: 2,
            grid_size: 1,
            use_mask_features: false,
            content_aware_keys: true,
        }
    }
}

impl ModelConfig {
    pub fn new(grid_size: usize, n_classes: usize) -> Self {
        Self { grid_size, n_classes, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("d_r", self.d_r),
            ("d_h", self.d_h),
            ("d_k", self.d_k),
            ("d_v", self.d_v),
            ("n_heads", self.n_heads),
            ("gru_hidden", self.gru_hidden),
            ("n_classes", self.n_classes),
            ("grid_size", self.grid_size),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, d)| *d == 0) {
            return Err(ModelError::Arg(format!("{name} must be >= 1")));
        }
        if self.q_refs < 2 {
            return Err(ModelError::Arg("q_refs must be >= 2".into()));
        }
        if self.d_k % self.n_heads != 0 || self.d_v % self.n_heads != 0 {
            return Err(ModelError::Arg(format!(
                "d_k = {} and d_v = {} must be divisible by n_heads = {}",
                self.d_k, self.d_v, self.n_heads
            )));
        }
        Ok(())
    }

    /// Encoder input width.
    pub fn enc_in(&self) -> usize {
        if self.use_mask_features {
            2 * self.grid_size
        } else {
            self.grid_size
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lr: 1e-3, batch: 64, epochs: 30, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(ModelError::Arg(format!("lr = {} must be > 0", self.lr)));
        }
        if self.batch == 0 {
            return Err(ModelError::Arg("batch must be >= 1".into()));
        }
        Ok(())
    }
}
