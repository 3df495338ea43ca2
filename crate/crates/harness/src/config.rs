use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unifi_core::{ClusterKey, DEFAULT_WINDOW_US};
use unifi_sanitize::SanitizeConfig;
use unifi_timeattn::ModelConfig;

use crate::error::{HarnessError, Result};
use crate::har::HarSynthConfig;

/// Where the streams come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A manifest written by `unifi synth` (or by hand).
    Manifest(PathBuf),
    /// Stream files; each must carry its own label.
    Streams(Vec<PathBuf>),
    /// Generated in memory.
    Synth(HarSynthConfig),
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Synth(HarSynthConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Stratified by class over individual windows.
    #[default]
    Window,
    /// Whole subjects held out; subjects are drawn until the test share is
    /// reached.
    Subject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSpec {
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    /// Training share of the windows.
    pub split: f64,
    pub split_mode: SplitMode,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            lr: 1e-3,
            batch: 64,
            epochs: 30,
            seeds: vec![0, 1, 2, 3, 4],
            split: 0.8,
            split_mode: SplitMode::Window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSpec {
    pub win_us: i64,
    /// Defaults to the window length (no overlap).
    pub stride_us: Option<i64>,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { win_us: DEFAULT_WINDOW_US, stride_us: None }
    }
}

impl WindowSpec {
    pub fn stride(&self) -> i64 {
        self.stride_us.unwrap_or(self.win_us)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mr_grid: Vec<f64>,
    pub scv_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Keep only packets of these clusters before sanitization.
    pub clusters: Option<Vec<ClusterKey>>,
    pub sanitize: SanitizeConfig,
    /// `grid_size` and `n_classes` are filled in from the data.
    pub model: ModelConfig,
    pub train: TrainSpec,
    pub window: WindowSpec,
    /// Standardize every grid position with statistics of the training
    /// windows' unmasked entries.
    pub standardize: bool,
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSpec::default(),
            clusters: None,
            sanitize: SanitizeConfig::default(),
            model: ModelConfig::default(),
            train: TrainSpec::default(),
            window: WindowSpec::default(),
            standardize: true,
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = parse_json(&read_config(path)?)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Makes relative dataset paths relative to `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        match &mut self.dataset {
            DatasetSpec::Manifest(p) => *p = dir.join(&*p),
            DatasetSpec::Streams(ps) => ps.iter_mut().for_each(|p| *p = dir.join(&*p)),
            DatasetSpec::Synth(_) => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.train;
        if !(t.split > 0.0 && t.split < 1.0) {
            return Err(HarnessError::config("train.split", "must be in (0, 1)"));
        }
        if t.seeds.is_empty() {
            return Err(HarnessError::config("train.seeds", "at least one seed required"));
        }
        if !(t.lr > 0.0) || !t.lr.is_finite() {
            return Err(HarnessError::config("train.lr", "must be > 0"));
        }
        if t.batch == 0 {
            return Err(HarnessError::config("train.batch", "must be >= 1"));
        }
        if self.window.win_us <= 0 || self.window.stride() <= 0 {
            return Err(HarnessError::config("window", "window and stride must be positive"));
        }
        self.sanitize.validate().map_err(|e| HarnessError::config("sanitize", e.to_string()))?;
        // Placeholder sizes: the real ones come from the data.
        let probe = ModelConfig { grid_size: 1, n_classes: 1, ..self.model.clone() };
        probe.validate().map_err(|e| HarnessError::config("model", e.to_string()))?;
        if let DatasetSpec::Synth(s) = &self.dataset {
            s.validate("dataset.synth")?;
        }
        if let Some(s) = &self.sweep {
            let bad = |v: &[f64]| v.is_empty() || v.iter().any(|x| !x.is_finite());
            if bad(&s.mr_grid) {
                return Err(HarnessError::config("sweep.mr_grid", "must be a non-empty list of numbers"));
            }
            if bad(&s.scv_grid) {
                return Err(HarnessError::config("sweep.scv_grid", "must be a non-empty list of numbers"));
            }
        }
        Ok(())
    }
}

/// Reads a config file; failing to read it is a configuration error.
pub fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::config(path.display().to_string(), e.to_string()))
}

/// Deserializes JSON, reporting the path of the offending key on failure.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        HarnessError::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}
