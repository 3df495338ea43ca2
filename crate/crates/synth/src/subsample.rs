use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use unifi_core::{compute_scv, stream_mr, CsiStream, DEFAULT_MR_BIN_US};

use crate::error::{Result, SynthError};
use crate::traffic::source_rng;

/// Acceptance band around the requested missing rate.
pub const MR_TOLERANCE: f64 = 0.05;
/// Acceptance band around the requested SCV.
pub const SCV_TOLERANCE: f64 = 0.15;

const MAX_ROUNDS: usize = 60;
const SUBSAMPLE_STREAM: u64 = 0x5AB5_A4B1E;

#[derive(Debug, Clone)]
pub struct SubsampleOutcome {
    pub stream: CsiStream,
    pub target_mr: f64,
    pub target_scv: f64,
    pub achieved_mr: f64,
    pub achieved_scv: f64,
}

impl SubsampleOutcome {
    pub fn within_tolerance(&self) -> bool {
        (self.achieved_mr - self.target_mr).abs() <= MR_TOLERANCE
            && (self.achieved_scv - self.target_scv).abs() <= SCV_TOLERANCE
    }
}

struct Measured {
    keep: Vec<usize>,
    mr: f64,
    scv: f64,
}

/// Thins a fixed-rate stream to a target missing rate and sampling
/// irregularity.
///
/// Candidate arrival times come from a renewal process with mean interval
/// `base / (1 − MR)` (`base` is the input's median spacing) and are snapped to
/// the nearest input packet. Each interval is `base` plus a Gamma excess whose
/// shape is set from the requested SCV. Snapping biases the realised metrics,
/// so the excess mean and CV are re-tuned from the measured MR/SCV over a
/// bounded number of rounds and the closest realisation is returned. The reported metrics are always the measured ones, on the
/// input stream's time span and 10 ms bins.
pub fn subsample_to_target(
    stream: &CsiStream,
    target_mr: f64,
    target_scv: f64,
    seed: u64,
) -> Result<SubsampleOutcome> {
    if !(0.0..=0.95).contains(&target_mr) {
        return Err(SynthError::Infeasible(format!("target MR {target_mr} outside [0, 0.95]")));
    }
    if !(0.0..=3.0).contains(&target_scv) {
        return Err(SynthError::Infeasible(format!("target SCV {target_scv} outside [0, 3]")));
    }
    let ts = stream.timestamps();
    if ts.len() < 3 {
        return Err(SynthError::Infeasible("input stream has fewer than 3 packets".into()));
    }
    let (start, end) = (ts[0], ts[ts.len() - 1]);
    let measure = |keep: Vec<usize>| -> Result<Measured> {
        let kept: Vec<i64> = keep.iter().map(|&i| ts[i]).collect();
        let mr = stream_mr(&kept, start, end, DEFAULT_MR_BIN_US)?;
        let scv = if kept.len() >= 3 { compute_scv(&kept)? } else { f64::INFINITY };
        Ok(Measured { keep, mr, scv })
    };

    let input = measure((0..ts.len()).collect())?;
    if target_mr + MR_TOLERANCE < input.mr {
        return Err(SynthError::Infeasible(format!(
            "target MR {target_mr} below the input's MR {:.3}",
            input.mr
        )));
    }
    let miss = |m: &Measured| {
        ((m.mr - target_mr) / MR_TOLERANCE).abs().max(((m.scv - target_scv) / SCV_TOLERANCE).abs())
    };
    if miss(&input) <= 0.5 {
        return Ok(finish(stream, input, target_mr, target_scv));
    }

    let mut gaps: Vec<i64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_unstable();
    let base = gaps[gaps.len() / 2] as f64;

    // Every interval is one input period plus a Gamma-distributed excess, so
    // picks never collapse onto the same packet: MR follows the mean interval
    // and SCV follows the excess CV.
    let mut excess = base * (1.0 / (1.0 - target_mr) - 1.0);
    let mut cv = if excess > 0.0 { target_scv * (base + excess) / excess } else { 0.0 };
    let mut best: Option<Measured> = None;
    for _ in 0..MAX_ROUNDS {
        let mut rng = source_rng(seed, SUBSAMPLE_STREAM);
        let m = measure(renewal_pick(&ts, base, excess, cv, &mut rng))?;
        let (mr, scv) = (m.mr, m.scv);
        if best.as_ref().is_none_or(|b| miss(&m) < miss(b)) {
            best = Some(m);
        }
        if best.as_ref().is_some_and(|b| miss(b) <= 0.5) || excess == 0.0 {
            break;
        }
        let mean = base + excess;
        let occupancy_ratio = ((1.0 - mr) / (1.0 - target_mr)).clamp(0.5, 2.0);
        excess = (mean * occupancy_ratio - base).max(0.01 * base);
        if target_scv > 0.0 {
            if scv.is_finite() && scv > 0.0 {
                cv *= (target_scv / scv).powf(0.8).clamp(0.5, 2.0);
            } else {
                cv = cv.max(0.1) * 1.5;
            }
        }
    }
    Ok(finish(stream, best.expect("at least one round"), target_mr, target_scv))
}

/// Indices of the input packets nearest to a renewal process whose intervals
/// are `base` plus a Gamma excess with the given mean and CV.
fn renewal_pick(ts: &[i64], base: f64, excess: f64, cv: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let gamma = (cv > 1e-9 && excess > 0.0).then(|| {
        let shape = 1.0 / (cv * cv);
        Gamma::new(shape, excess / shape).expect("positive parameters")
    });
    let draw = |rng: &mut ChaCha8Rng| match &gamma {
        Some(g) => base + g.sample(rng),
        None => base + excess,
    };
    let (start, end) = (ts[0] as f64, ts[ts.len() - 1] as f64);
    let mut t = start + rng.random::<f64>() * (base + excess).min(end - start);
    let mut keep: Vec<usize> = Vec::new();
    while t <= end + 0.5 * base {
        let i = nearest(ts, t);
        if keep.last() != Some(&i) {
            keep.push(i);
        }
        t += draw(rng);
    }
    keep
}

fn nearest(ts: &[i64], t: f64) -> usize {
    let hi = ts.partition_point(|&x| (x as f64) < t);
    if hi == 0 {
        0
    } else if hi == ts.len() {
        ts.len() - 1
    } else if t - ts[hi - 1] as f64 <= ts[hi] as f64 - t {
        hi - 1
    } else {
        hi
    }
}

fn finish(stream: &CsiStream, m: Measured, target_mr: f64, target_scv: f64) -> SubsampleOutcome {
    let mut out = stream.clone();
    out.packets = m.keep.iter().map(|&i| stream.packets[i].clone()).collect();
    SubsampleOutcome {
        stream: out,
        target_mr,
        target_scv,
        achieved_mr: m.mr,
        achieved_scv: m.scv,
    }
}
