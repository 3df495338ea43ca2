//! Synthetic activity-recognition corpus: one Doppler frequency per class,
//! several recording sessions whose geometry is shared by all classes, each
//! observed through a mix of traffic sources.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unifi_core::{Band, CsiStream, FrameType, SubcarrierGrids};
use unifi_synth::{
    emit_stream, Arrival, GainModel, ImpairmentConfig, Mover, SceneConfig, StaticPath, TrafficCluster,
    TrafficConfig,
};

use crate::error::{HarnessError, Result, StageExt};

const ROOM_STREAM: u64 = 1 << 40;

/// Tone counts of the compact subcarrier grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n80: usize,
    pub n20: usize,
    pub n24: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n80: 32, n20: 8, n24: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarSynthConfig {
    pub seed: u64,
    /// Doppler shift of the moving reflector for each class.
    pub doppler_hz: Vec<f64>,
    /// Per-stream relative jitter of the class Doppler, uniform in `±jitter`.
    pub doppler_jitter: f64,
    pub streams_per_class: usize,
    pub duration_s: f64,
    pub grid: GridSpec,
    pub traffic: Vec<TrafficCluster>,
    pub static_paths: usize,
    /// Range of the moving reflector's gain relative to the direct path.
    pub mover_gain: [f64; 2],
    pub noise_sigma: f64,
    pub impairments: ImpairmentConfig,
}

impl Default for HarSynthConfig {
    fn default() -> Self {
        HarSynthConfig {
            seed: 0,
            doppler_hz: vec![2.0, 6.0, 12.0],
            doppler_jitter: 0.05,
            streams_per_class: 2,
            duration_s: 120.0,
            grid: GridSpec::default(),
            traffic: default_traffic(),
            static_paths: 3,
            mover_gain: [0.3, 0.6],
            noise_sigma: 0.02,
            impairments: ImpairmentConfig {
                gain: GainModel::LogUniform { lo: 0.5, hi: 2.0 },
                error_sigma: 0.005,
                ..Default::default()
            },
        }
    }
}

/// Beacons, Poisson control frames and bursty wideband data on 5 GHz.
pub fn default_traffic() -> Vec<TrafficCluster> {
    let cluster = |id: &str, frame_type, bw_mhz, arrival| TrafficCluster {
        cluster_id: id.into(),
        band: Band::Band5G,
        frame_type,
        bw_mhz,
        arrival,
    };
    vec![
        cluster("beacon", FrameType::Mgmt, 20, Arrival::Periodic { rate_hz: 10.0 }),
        cluster("ctrl", FrameType::Ctrl, 20, Arrival::Poisson { rate_hz: 10.0 }),
        cluster(
            "data",
            FrameType::Data,
            80,
            Arrival::Bursty { burst_rate_hz: 1000.0, burst_len: 6, gap_ms: 60.0, gap_jitter: 0.5 },
        ),
    ]
}

impl HarSynthConfig {
    pub fn n_classes(&self) -> usize {
        self.doppler_hz.len()
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let at = |key: &str| if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
        let err = |key: &str, reason: &str| Err(HarnessError::config(at(key), reason));
        if self.doppler_hz.is_empty() {
            return err("doppler_hz", "at least one class required");
        }
        if self.doppler_hz.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return err("doppler_hz", "frequencies must be finite and >= 0");
        }
        if !(0.0..1.0).contains(&self.doppler_jitter) {
            return err("doppler_jitter", "must be in [0, 1)");
        }
        if self.streams_per_class == 0 {
            return err("streams_per_class", "must be >= 1");
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return err("duration_s", "must be positive");
        }
        if self.traffic.is_empty() {
            return err("traffic", "at least one traffic source required");
        }
        if self.static_paths == 0 {
            return err("static_paths", "must be >= 1");
        }
        let [lo, hi] = self.mover_gain;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return err("mover_gain", "need 0 <= lo <= hi");
        }
        if !(self.noise_sigma >= 0.0) {
            return err("noise_sigma", "must be >= 0");
        }
        self.grids().map_err(|e| HarnessError::config(at("grid"), e.to_string()))?;
        self.traffic_config()
            .validate(&at("traffic"))
            .and_then(|_| self.impairments.validate(&at("impairments")))
            .map_err(|e| match e {
                unifi_synth::SynthError::Config { path, reason } => HarnessError::Config { path, reason },
                other => HarnessError::config(path, other.to_string()),
            })
    }

    pub fn grids(&self) -> unifi_core::Result<SubcarrierGrids> {
        SubcarrierGrids::compact(self.grid.n80, self.grid.n20, self.grid.n24)
    }

    fn traffic_config(&self) -> TrafficConfig {
        TrafficConfig { clusters: self.traffic.clone(), duration_s: self.duration_s }
    }

    /// Session `k`: the room's static paths and the moving reflector's gain
    /// and delay. Shared by every class, so only the Doppler rate differs
    /// between the classes' streams of one session.
    pub fn session(&self, k: usize) -> (Vec<StaticPath>, f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(ROOM_STREAM + k as u64);
        let mut paths = vec![StaticPath { delay_ns: rng.random_range(0.0..20.0), gain: 1.0 }];
        for _ in 1..self.static_paths {
            paths.push(StaticPath {
                delay_ns: rng.random_range(20.0..150.0),
                gain: rng.random_range(0.2..0.6),
            });
        }
        let [lo, hi] = self.mover_gain;
        let gain = if hi > lo { rng.random_range(lo..hi) } else { lo };
        (paths, gain, rng.random_range(20.0..120.0))
    }

    /// Stream `k` of class `class`: session `k` with the reflector moving at
    /// the class Doppler, plus the seed for its traffic and impairments.
    pub fn scene(&self, class: usize, k: usize) -> (SceneConfig, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((class * 1_000_003 + k) as u64);
        let j = self.doppler_jitter;
        let doppler_hz = self.doppler_hz[class] * (1.0 + j * (2.0 * rng.random::<f64>() - 1.0));
        let (static_paths, path_gain, reflect_delay_ns) = self.session(k);
        let scene = SceneConfig {
            static_paths,
            mover: Some(Mover { doppler_hz, path_gain, reflect_delay_ns }),
            motion_class: class as u32,
            noise_sigma: self.noise_sigma,
        };
        (scene, rng.next_u64())
    }

    /// Emits every stream, class-major. Stream `k` of class `c` is labelled
    /// `c` and tagged with subject `s{k}`.
    pub fn generate(&self) -> Result<Vec<CsiStream>> {
        self.validate("")?;
        let grids = self.grids().stage("synth")?;
        let traffic = self.traffic_config();
        let mut out = Vec::with_capacity(self.n_classes() * self.streams_per_class);
        for class in 0..self.n_classes() {
            for k in 0..self.streams_per_class {
                let (scene, seed) = self.scene(class, k);
                let mut s = emit_stream(&grids, &scene, &traffic, &self.impairments, seed)
                    .stage("synth")?;
                s.subject_id = Some(format!("s{k}"));
                out.push(s);
            }
        }
        Ok(out)
    }
}
