use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unifi_core::{Band, ClusterKey, FrameType, SubcarrierGrids};

use crate::error::{config_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticPath {
    pub delay_ns: f64,
    pub gain: f64,
}

/// A reflector moving with constant Doppler shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mover {
    pub doppler_hz: f64,
    pub path_gain: f64,
    pub reflect_delay_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub static_paths: Vec<StaticPath>,
    #[serde(default)]
    pub mover: Option<Mover>,
    pub motion_class: u32,
    /// Std of complex Gaussian channel noise added before taking magnitudes.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl SceneConfig {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.static_paths.is_empty() {
            return Err(config_err(format!("{path}.static_paths"), "at least one static path required"));
        }
        for (i, p) in self.static_paths.iter().enumerate() {
            if !p.gain.is_finite() || !p.delay_ns.is_finite() {
                return Err(config_err(format!("{path}.static_paths[{i}]"), "non-finite gain or delay"));
            }
        }
        if let Some(m) = &self.mover {
            if !(m.doppler_hz >= 0.0) || !m.doppler_hz.is_finite() {
                return Err(config_err(format!("{path}.mover.doppler_hz"), "must be finite and >= 0"));
            }
            if !m.path_gain.is_finite() || !m.reflect_delay_ns.is_finite() {
                return Err(config_err(format!("{path}.mover"), "non-finite gain or delay"));
            }
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(config_err(format!("{path}.noise_sigma"), "must be >= 0"));
        }
        Ok(())
    }
}

/// Packet arrival process of one traffic source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Arrival {
    /// `t = k / rate` exactly.
    Periodic { rate_hz: f64 },
    /// Exponential inter-arrival times.
    Poisson { rate_hz: f64 },
    /// Bursts of `burst_len` packets spaced `1 / burst_rate_hz` apart,
    /// separated by `gap_ms` of silence (optionally jittered by a uniform
    /// factor in `[1 - gap_jitter, 1 + gap_jitter]`).
    Bursty {
        burst_rate_hz: f64,
        burst_len: u32,
        gap_ms: f64,
        #[serde(default)]
        gap_jitter: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficCluster {
    pub cluster_id: String,
    pub band: Band,
    pub frame_type: FrameType,
    pub bw_mhz: u16,
    pub arrival: Arrival,
}

impl TrafficCluster {
    pub fn key(&self) -> ClusterKey {
        ClusterKey {
            band: self.band,
            frame_type: self.frame_type,
            bw_mhz: self.bw_mhz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    pub clusters: Vec<TrafficCluster>,
    pub duration_s: f64,
}

impl TrafficConfig {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return Err(config_err(format!("{path}.duration_s"), "must be positive"));
        }
        let mut keys = std::collections::BTreeSet::new();
        for (i, c) in self.clusters.iter().enumerate() {
            let at = format!("{path}.clusters[{i}]");
            unifi_core::types::check_bandwidth(c.bw_mhz)
                .map_err(|e| config_err(format!("{at}.bw_mhz"), e.to_string()))?;
            if !keys.insert(c.key()) {
                return Err(config_err(at, format!("duplicate PHY metadata {}", c.key())));
            }
            let positive = |v: f64, field: &str| {
                if v > 0.0 && v.is_finite() {
                    Ok(())
                } else {
                    Err(config_err(format!("{at}.arrival.{field}"), "must be positive"))
                }
            };
            match c.arrival {
                Arrival::Periodic { rate_hz } | Arrival::Poisson { rate_hz } => {
                    positive(rate_hz, "rate_hz")?
                }
                Arrival::Bursty {
                    burst_rate_hz,
                    burst_len,
                    gap_ms,
                    gap_jitter,
                } => {
                    positive(burst_rate_hz, "burst_rate_hz")?;
                    positive(burst_len as f64, "burst_len")?;
                    positive(gap_ms, "gap_ms")?;
                    if !(0.0..1.0).contains(&gap_jitter) {
                        return Err(config_err(format!("{at}.arrival.gap_jitter"), "must be in [0, 1)"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-packet gain `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainModel {
    Fixed { value: f64 },
    /// `ln α` uniform on `[ln lo, ln hi]`.
    LogUniform { lo: f64, hi: f64 },
    /// `ln α_p = ρ ln α_{p-1} + (1 − ρ) u_p` with `u_p` log-uniform as above;
    /// kept per cluster so each link drifts slowly within `[lo, hi]`.
    Ar1 { lo: f64, hi: f64, rho: f64 },
    /// Uniform choice among the listed gains.
    Choice { values: Vec<f64> },
}

impl Default for GainModel {
    fn default() -> Self {
        GainModel::Fixed { value: 1.0 }
    }
}

/// Multiplicative preamble shaping over a cluster's subcarriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shaping {
    Constant(f64),
    Vector(Vec<f64>),
    /// `1 + depth · sin(2π · cycles · k / K)` over the `K` subcarriers.
    Ripple { depth: f64, cycles: f64 },
}

impl Shaping {
    /// The shaping vector for a layout of `k` subcarriers.
    pub fn resolve(&self, k: usize) -> std::result::Result<Vec<f64>, String> {
        let v = match self {
            Shaping::Constant(c) => vec![*c; k],
            Shaping::Vector(v) if v.len() == k => v.clone(),
            Shaping::Vector(v) => {
                return Err(format!("shaping vector has {} entries, layout has {k}", v.len()))
            }
            Shaping::Ripple { depth, cycles } => (0..k)
                .map(|i| 1.0 + depth * (std::f64::consts::TAU * cycles * i as f64 / k as f64).sin())
                .collect(),
        };
        if v.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err("shaping entries must be finite and > 0".into());
        }
        Ok(v)
    }
}

/// A fraction of one cluster's packets measured through a corrupted shaping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    pub cluster_id: String,
    pub rate: f64,
    pub shaping: Shaping,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentConfig {
    #[serde(default)]
    pub gain: GainModel,
    /// Keyed by cluster id; clusters without an entry are unshaped.
    #[serde(default)]
    pub shaping: BTreeMap<String, Shaping>,
    /// Std of the additive amplitude error (clamped at zero).
    #[serde(default)]
    pub error_sigma: f64,
    #[serde(default)]
    pub corruption: Option<Corruption>,
}

impl ImpairmentConfig {
    pub fn validate(&self, path: &str) -> Result<()> {
        let gain_path = format!("{path}.gain");
        match &self.gain {
            GainModel::Fixed { value } if !(*value > 0.0) => {
                return Err(config_err(gain_path, "gain must be > 0"))
            }
            GainModel::LogUniform { lo, hi } | GainModel::Ar1 { lo, hi, .. }
                if !(*lo > 0.0 && hi >= lo) =>
            {
                return Err(config_err(gain_path, "need 0 < lo <= hi"))
            }
            GainModel::Ar1 { rho, .. } if !(0.0..1.0).contains(rho) => {
                return Err(config_err(gain_path, "rho must be in [0, 1)"))
            }
            GainModel::Choice { values } if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) => {
                return Err(config_err(gain_path, "choices must be non-empty and > 0"))
            }
            _ => {}
        }
        if !(self.error_sigma >= 0.0) {
            return Err(config_err(format!("{path}.error_sigma"), "must be >= 0"));
        }
        if let Some(c) = &self.corruption {
            if !(0.0..=1.0).contains(&c.rate) {
                return Err(config_err(format!("{path}.corruption.rate"), "must be in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Everything needed to emit one stream; the JSON document read by
/// `unifi synth`-style tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub grids: SubcarrierGrids,
    pub scene: SceneConfig,
    pub traffic: TrafficConfig,
    #[serde(default)]
    pub impairments: ImpairmentConfig,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate("scene")?;
        self.traffic.validate("traffic")?;
        self.impairments.validate("impairments")
    }
}
