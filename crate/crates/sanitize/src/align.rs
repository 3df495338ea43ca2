use unifi_core::{ClusterKey, CsiStream};

use crate::cluster::Cluster;
use crate::error::{Result, SanitizeError};

/// A cluster's packets laid out on its (band, bandwidth) grid.
///
/// `amps[p][k]` is the magnitude of packet `p` at `sc_idx[k]`; tones a packet
/// does not carry hold 0 with `present[p][k] == false`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSeries {
    pub key: ClusterKey,
    pub sc_idx: Vec<i32>,
    pub t_us: Vec<i64>,
    pub amps: Vec<Vec<f64>>,
    pub present: Vec<Vec<bool>>,
    /// Index of each packet in the originating stream.
    pub source: Vec<usize>,
}

impl ClusterSeries {
    /// Every packet carries every tone.
    pub fn dense(key: ClusterKey, sc_idx: Vec<i32>, t_us: Vec<i64>, amps: Vec<Vec<f64>>) -> Self {
        let present = amps.iter().map(|a| vec![true; a.len()]).collect();
        let source = (0..t_us.len()).collect();
        ClusterSeries { key, sc_idx, t_us, amps, present, source }
    }

    pub fn from_stream(stream: &CsiStream, cluster: &Cluster) -> Result<Self> {
        let key = cluster.key;
        let layout = stream
            .grids
            .layout(key.band, key.bw_mhz)
            .ok_or_else(|| SanitizeError::Arg(format!("no grid declared for {key}")))?
            .to_vec();
        let n = cluster.members.len();
        let mut s = ClusterSeries {
            key,
            sc_idx: layout,
            t_us: Vec::with_capacity(n),
            amps: Vec::with_capacity(n),
            present: Vec::with_capacity(n),
            source: cluster.members.clone(),
        };
        for &i in &cluster.members {
            let p = &stream.packets[i];
            let mut amp = vec![0.0; s.sc_idx.len()];
            let mut present = vec![false; s.sc_idx.len()];
            for (sc, a) in p.sc_idx.iter().zip(&p.amp) {
                let k = s.sc_idx.binary_search(sc).map_err(|_| {
                    SanitizeError::Arg(format!("packet {i}: subcarrier {sc} outside the {key} grid"))
                })?;
                amp[k] = *a;
                present[k] = true;
            }
            s.t_us.push(p.t_us);
            s.amps.push(amp);
            s.present.push(present);
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.t_us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_us.is_empty()
    }

    /// Keeps only the packets at `idx`.
    pub fn retain_indices(&mut self, idx: &[usize]) {
        fn pick<T>(v: &mut Vec<T>, idx: &[usize]) {
            let mut keep = vec![false; v.len()];
            idx.iter().for_each(|&i| keep[i] = true);
            let mut it = keep.into_iter();
            v.retain(|_| it.next().unwrap_or(false));
        }
        pick(&mut self.t_us, idx);
        pick(&mut self.amps, idx);
        pick(&mut self.present, idx);
        pick(&mut self.source, idx);
    }
}

/// Per-subcarrier amplitude ratio between two clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMap {
    pub src_key: ClusterKey,
    pub ref_key: ClusterKey,
    /// Shared subcarrier indices the ratios are defined on.
    pub sc_idx: Vec<i32>,
    pub gamma: Vec<f64>,
    pub n_pairs: usize,
}

impl AlignmentMap {
    pub fn gamma_at(&self, sc: i32) -> Option<f64> {
        self.sc_idx.binary_search(&sc).ok().map(|k| self.gamma[k])
    }
}

/// Estimates `γ_k`, the mean over all packet pairs within `t_c_us` of each
/// other of `src_k / ref_k`, on the subcarriers both clusters carry.
///
/// A packet may take part in several pairs. Pairs with a zero reference
/// amplitude on any shared tone are skipped.
pub fn align_clusters(src: &ClusterSeries, reference: &ClusterSeries, t_c_us: i64) -> Result<AlignmentMap> {
    let (src_key, ref_key) = (src.key, reference.key);
    if t_c_us <= 0 {
        return Err(SanitizeError::Arg(format!("t_c_us = {t_c_us} must be > 0")));
    }
    // (position in src, position in ref) per shared tone.
    let shared: Vec<(usize, usize)> = src
        .sc_idx
        .iter()
        .enumerate()
        .filter_map(|(i, sc)| reference.sc_idx.binary_search(sc).ok().map(|j| (i, j)))
        .collect();
    if src.key.band != reference.key.band || shared.is_empty() {
        return Err(SanitizeError::NoSharedSubcarriers { src: src_key, reference: ref_key });
    }

    let mut sum = vec![0.0; shared.len()];
    let mut count = vec![0usize; shared.len()];
    let (mut n_pairs, mut skipped) = (0usize, 0usize);
    for (p, &tp) in src.t_us.iter().enumerate() {
        let lo = reference.t_us.partition_point(|&t| t < tp - t_c_us);
        let hi = reference.t_us.partition_point(|&t| t <= tp + t_c_us);
        for q in lo..hi {
            let both = |&(i, j): &(usize, usize)| src.present[p][i] && reference.present[q][j];
            if !shared.iter().any(both) {
                continue;
            }
            if shared.iter().any(|s| both(s) && reference.amps[q][s.1] == 0.0) {
                skipped += 1;
                continue;
            }
            n_pairs += 1;
            for (k, s) in shared.iter().enumerate() {
                if both(s) {
                    sum[k] += src.amps[p][s.0] / reference.amps[q][s.1];
                    count[k] += 1;
                }
            }
        }
    }
    if n_pairs == 0 {
        return Err(if skipped > 0 {
            SanitizeError::DivByZero { src: src_key, reference: ref_key }
        } else {
            SanitizeError::NoPairs { src: src_key, reference: ref_key }
        });
    }

    let mut sc_idx = Vec::new();
    let mut gamma = Vec::new();
    for (k, &(i, _)) in shared.iter().enumerate() {
        // A ratio of 0 would blow up the rescaling; such tones stay unscaled.
        if count[k] > 0 && sum[k] > 0.0 {
            sc_idx.push(src.sc_idx[i]);
            gamma.push(sum[k] / count[k] as f64);
        }
    }
    Ok(AlignmentMap { src_key, ref_key, sc_idx, gamma, n_pairs })
}

/// Divides the src cluster's amplitudes by `γ_k` on the mapped subcarriers;
/// the remaining tones are left as they are.
pub fn apply_alignment(src: &mut ClusterSeries, map: &AlignmentMap) -> Result<()> {
    if src.key != map.src_key {
        return Err(SanitizeError::Arg(format!(
            "alignment map is for {}, not {}",
            map.src_key, src.key
        )));
    }
    let scale: Vec<Option<f64>> = src.sc_idx.iter().map(|&sc| map.gamma_at(sc)).collect();
    for amp in &mut src.amps {
        for (a, g) in amp.iter_mut().zip(&scale) {
            if let Some(g) = g {
                *a /= g;
            }
        }
    }
    Ok(())
}
