use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::config::{Arrival, TrafficConfig};

/// One arrival: timestamp and the index of its source in
/// [`TrafficConfig::clusters`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrivalEvent {
    pub t_us: i64,
    pub cluster: usize,
}

/// Per-source RNG: one ChaCha stream per cluster index, so adding a source
/// does not perturb the others.
pub(crate) fn source_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Arrival times of every source over `[0, duration)`, merged and sorted by
/// (time, PHY metadata). Within one source timestamps are strictly
/// increasing at microsecond resolution.
pub fn sample_traffic(cfg: &TrafficConfig, seed: u64) -> Vec<ArrivalEvent> {
    let horizon = cfg.duration_s * 1e6;
    let mut events = Vec::new();
    for (ci, cluster) in cfg.clusters.iter().enumerate() {
        let mut rng = source_rng(seed, ci as u64);
        let times = match cluster.arrival {
            Arrival::Periodic { rate_hz } => periodic(rate_hz, horizon),
            Arrival::Poisson { rate_hz } => poisson(rate_hz, horizon, &mut rng),
            Arrival::Bursty {
                burst_rate_hz,
                burst_len,
                gap_ms,
                gap_jitter,
            } => bursty(burst_rate_hz, burst_len, gap_ms, gap_jitter, horizon, &mut rng),
        };
        let mut last = i64::MIN;
        for t in times {
            let t_us = (t.round() as i64).max(last.saturating_add(1));
            if (t_us as f64) >= horizon {
                break;
            }
            events.push(ArrivalEvent { t_us, cluster: ci });
            last = t_us;
        }
    }
    events.sort_by_key(|e| (e.t_us, cfg.clusters[e.cluster].key()));
    events
}

fn periodic(rate_hz: f64, horizon: f64) -> Vec<f64> {
    let period = 1e6 / rate_hz;
    (0..)
        .map(|k| k as f64 * period)
        .take_while(|&t| t < horizon)
        .collect()
}

fn poisson(rate_hz: f64, horizon: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let exp = Exp::new(rate_hz / 1e6).expect("rate validated positive");
    let mut out = Vec::new();
    let mut t = exp.sample(rng);
    while t < horizon {
        out.push(t);
        t += exp.sample(rng);
    }
    out
}

fn bursty(
    burst_rate_hz: f64,
    burst_len: u32,
    gap_ms: f64,
    gap_jitter: f64,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let spacing = 1e6 / burst_rate_hz;
    let gap = gap_ms * 1e3;
    let period = spacing * (burst_len.saturating_sub(1)) as f64 + gap;
    let mut start = rng.random::<f64>() * period;
    let mut out = Vec::new();
    while start < horizon {
        for i in 0..burst_len {
            out.push(start + i as f64 * spacing);
        }
        let jitter = if gap_jitter > 0.0 {
            1.0 + gap_jitter * (2.0 * rng.random::<f64>() - 1.0)
        } else {
            1.0
        };
        start += spacing * (burst_len - 1) as f64 + gap * jitter;
    }
    out
}
