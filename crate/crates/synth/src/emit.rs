use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use unifi_core::{CsiStream, PacketRecord, SubcarrierGrids};

use crate::channel::{channel_response, subcarrier_freqs};
use crate::config::{Corruption, GainModel, ImpairmentConfig, SceneConfig, TrafficConfig};
use crate::error::{Result, SynthError};
use crate::traffic::{sample_traffic, source_rng};

/// Offset separating impairment RNG streams from traffic streams.
const IMPAIRMENT_STREAM: u64 = 1 << 32;

struct ClusterPlan {
    sc_idx: Vec<i32>,
    freqs: Vec<f64>,
    shaping: Vec<f64>,
    corrupted: Option<(f64, Vec<f64>)>,
    rng: ChaCha8Rng,
    log_gain: Option<f64>,
}

/// Emits one stream: for each arrival `p` of cluster `c`,
/// `a = α_p · (S_c ⊙ |H(t_p) + n|) + ε`, clamped at zero, with `n` complex
/// channel noise (`scene.noise_sigma`) and `ε` real amplitude error
/// (`impairments.error_sigma`). Bit-reproducible for a given seed.
pub fn emit_stream(
    grids: &SubcarrierGrids,
    scene: &SceneConfig,
    traffic: &TrafficConfig,
    impairments: &ImpairmentConfig,
    seed: u64,
) -> Result<CsiStream> {
    scene.validate("scene")?;
    traffic.validate("traffic")?;
    impairments.validate("impairments")?;

    let mut plans = Vec::with_capacity(traffic.clusters.len());
    for (ci, c) in traffic.clusters.iter().enumerate() {
        let grid_err = |reason: String| SynthError::Grid {
            cluster: c.cluster_id.clone(),
            reason,
        };
        let sc_idx = grids
            .layout(c.band, c.bw_mhz)
            .ok_or_else(|| grid_err(format!("no {} bw{} layout", c.band, c.bw_mhz)))?
            .to_vec();
        let shaping = match impairments.shaping.get(&c.cluster_id) {
            Some(s) => s.resolve(sc_idx.len()).map_err(grid_err)?,
            None => vec![1.0; sc_idx.len()],
        };
        let corrupted = match &impairments.corruption {
            Some(Corruption {
                cluster_id,
                rate,
                shaping,
            }) if *cluster_id == c.cluster_id => {
                Some((*rate, shaping.resolve(sc_idx.len()).map_err(grid_err)?))
            }
            _ => None,
        };
        plans.push(ClusterPlan {
            freqs: subcarrier_freqs(c.band, &sc_idx),
            sc_idx,
            shaping,
            corrupted,
            rng: source_rng(seed, IMPAIRMENT_STREAM + ci as u64),
            log_gain: None,
        });
    }

    let error = Normal::new(0.0, impairments.error_sigma).expect("sigma validated");
    let noise = Normal::new(0.0, scene.noise_sigma).expect("sigma validated");
    let mut stream = CsiStream::new(0, grids.clone());
    stream.label = Some(scene.motion_class);

    for ev in sample_traffic(traffic, seed) {
        let c = &traffic.clusters[ev.cluster];
        let plan = &mut plans[ev.cluster];
        let gain = draw_gain(&impairments.gain, &mut plan.log_gain, &mut plan.rng);
        let shaping = match &plan.corrupted {
            Some((rate, s)) if plan.rng.random::<f64>() < *rate => s,
            _ => &plan.shaping,
        };
        let amp = channel_response(scene, ev.t_us, &plan.freqs)
            .into_iter()
            .zip(shaping)
            .map(|((re, im), s)| {
                let mag = if scene.noise_sigma > 0.0 {
                    (re + noise.sample(&mut plan.rng)).hypot(im + noise.sample(&mut plan.rng))
                } else {
                    re.hypot(im)
                };
                let e = if impairments.error_sigma > 0.0 {
                    error.sample(&mut plan.rng)
                } else {
                    0.0
                };
                (gain * s * mag + e).max(0.0)
            })
            .collect();
        stream.packets.push(PacketRecord {
            t_us: ev.t_us,
            band: c.band,
            frame_type: c.frame_type,
            bw_mhz: c.bw_mhz,
            sc_idx: plan.sc_idx.clone(),
            amp,
        });
    }
    Ok(stream)
}

fn draw_gain(model: &GainModel, state: &mut Option<f64>, rng: &mut ChaCha8Rng) -> f64 {
    match model {
        GainModel::Fixed { value } => *value,
        GainModel::LogUniform { lo, hi } => rng.random_range(lo.ln()..=hi.ln()).exp(),
        GainModel::Ar1 { lo, hi, rho } => {
            let u = rng.random_range(lo.ln()..=hi.ln());
            let next = match *state {
                Some(prev) => rho * prev + (1.0 - rho) * u,
                None => u,
            };
            *state = Some(next);
            next.exp()
        }
        GainModel::Choice { values } => values[rng.random_range(0..values.len())],
    }
}
