use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unifi_core::Band;

use crate::error::{Result, SanitizeError};

/// Lag-1 Pearson autocorrelation of a power series: the correlation between
/// `p[..T-1]` and `p[1..]`. Zero when either segment has no variance.
pub fn motion_statistic(power: &[f64]) -> Result<f64> {
    if power.len() < 3 {
        return Err(SanitizeError::Arg(format!(
            "motion statistic needs at least 3 samples, got {}",
            power.len()
        )));
    }
    let (x, y) = (&power[..power.len() - 1], &power[1..]);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sizes of `k_sel` contiguous sub-bands over `k` tones; the first
/// `k % k_sel` sub-bands take one extra tone.
pub fn subband_sizes(k: usize, k_sel: usize) -> Vec<usize> {
    let (base, extra) = (k / k_sel, k % k_sel);
    (0..k_sel).map(|b| base + usize::from(b < extra)).collect()
}

/// Picks the tone with the largest motion statistic in each of `k_sel`
/// contiguous sub-bands.
///
/// `windows` holds one `T × K` amplitude matrix per window of the cluster;
/// each tone's statistic is averaged over the windows with at least 3 rows.
/// Returns ascending positions into the `K` columns, ties going to the lower
/// position.
pub fn select_subcarriers(windows: &[Vec<Vec<f64>>], k_sel: usize) -> Result<Vec<usize>> {
    let k = windows
        .iter()
        .flat_map(|w| w.first())
        .map(|r| r.len())
        .next()
        .ok_or_else(|| SanitizeError::Arg("no packets to select subcarriers from".into()))?;
    if k_sel == 0 || k_sel > k {
        return Err(SanitizeError::Arg(format!("k_sel = {k_sel} not in [1, {k}]")));
    }
    let mut ms = vec![0.0; k];
    let mut used = 0usize;
    let mut col = Vec::new();
    for w in windows.iter().filter(|w| w.len() >= 3) {
        if w.iter().any(|r| r.len() != k) {
            return Err(SanitizeError::Arg("windows disagree on the number of tones".into()));
        }
        for (j, m) in ms.iter_mut().enumerate() {
            col.clear();
            col.extend(w.iter().map(|r| r[j] * r[j]));
            *m += motion_statistic(&col)?;
        }
        used += 1;
    }
    if used == 0 {
        return Err(SanitizeError::Arg("no window holds at least 3 packets".into()));
    }
    let mut out = Vec::with_capacity(k_sel);
    let mut start = 0;
    for size in subband_sizes(k, k_sel) {
        let best = (start..start + size)
            .reduce(|b, j| if ms[j] > ms[b] { j } else { b })
            .expect("sub-bands are non-empty");
        out.push(best);
        start += size;
    }
    Ok(out)
}

/// Frozen per-(band, bandwidth) subcarrier selection. Grids without an entry
/// are used in full.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IssSelection {
    /// Keyed `"<band>/bw<MHz>"`; values are selected subcarrier indices.
    pub selected: BTreeMap<String, Vec<i32>>,
}

impl IssSelection {
    pub(crate) fn grid_name(band: Band, bw_mhz: u16) -> String {
        format!("{band}/bw{bw_mhz}")
    }

    pub fn get(&self, band: Band, bw_mhz: u16) -> Option<&[i32]> {
        self.selected.get(&Self::grid_name(band, bw_mhz)).map(Vec::as_slice)
    }

    pub fn keeps(&self, band: Band, bw_mhz: u16, sc: i32) -> bool {
        self.get(band, bw_mhz).is_none_or(|s| s.binary_search(&sc).is_ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_zero() {
        assert_eq!(motion_statistic(&[2.0; 10]).unwrap(), 0.0);
    }

    #[test]
    fn alternating_is_minus_one() {
        let p: Vec<f64> = (0..11).map(|i| if i % 2 == 0 { 3.0 } else { 1.0 }).collect();
        assert!((motion_statistic(&p).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn slow_sinusoid_tends_to_one() {
        let ms = |n: usize| {
            let p: Vec<f64> = (0..n)
                .map(|i| 2.0 + (std::f64::consts::TAU * i as f64 / n as f64).sin())
                .collect();
            motion_statistic(&p).unwrap()
        };
        let (a, b, c) = (ms(20), ms(200), ms(2000));
        assert!(a < b && b < c, "{a} {b} {c}");
        assert!(c > 0.999);
    }

    #[test]
    fn too_short() {
        assert!(motion_statistic(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn subband_remainder_goes_first() {
        assert_eq!(subband_sizes(10, 3), vec![4, 3, 3]);
        assert_eq!(subband_sizes(4, 4), vec![1, 1, 1, 1]);
    }

    fn window(t: usize, k: usize, moving: &[usize]) -> Vec<Vec<f64>> {
        (0..t)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if moving.contains(&j) {
                            1.0 + 0.5 * (0.3 * i as f64).sin()
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn full_budget_is_identity() {
        let w = vec![window(20, 8, &[3])];
        assert_eq!(select_subcarriers(&w, 8).unwrap(), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn moving_tone_wins_its_subband() {
        let w = vec![window(40, 12, &[5]), window(30, 12, &[5])];
        // Sub-bands [0..4) [4..8) [8..12); constant tones tie at 0.
        assert_eq!(select_subcarriers(&w, 3).unwrap(), vec![0, 5, 8]);
        assert_eq!(select_subcarriers(&w, 1).unwrap(), vec![5]);
    }

    #[test]
    fn budget_errors() {
        let w = vec![window(20, 4, &[])];
        assert!(select_subcarriers(&w, 5).is_err());
        assert!(select_subcarriers(&w, 0).is_err());
        assert!(select_subcarriers(&[window(2, 4, &[])], 2).is_err());
    }
}
