use crate::error::{Result, SanitizeError};

/// Scales `amp` to unit Euclidean norm.
pub fn normalize_l2(amp: &[f64]) -> Result<Vec<f64>> {
    let norm = amp.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(SanitizeError::Degenerate(format!(
            "cannot normalize a vector with norm {norm}"
        )));
    }
    Ok(amp.iter().map(|a| a / norm).collect())
}

/// Splits a cluster of normalized magnitude vectors into (kept, discarded)
/// index lists: a vector is kept iff its Euclidean distance to the cluster's
/// mean vector is at most `tau_d`.
///
/// The mean is re-estimated on the survivors until no further vector is
/// discarded, so pruning an already-pruned cluster is a no-op. With a single
/// clean mode this normally stops after the first pass.
pub fn prune_outliers(packets: &[Vec<f64>], tau_d: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if packets.is_empty() {
        return Err(SanitizeError::EmptyCluster);
    }
    let k = packets[0].len();
    if packets.iter().any(|p| p.len() != k) {
        return Err(SanitizeError::Arg("packets in a cluster must have equal length".into()));
    }
    let mut kept: Vec<usize> = (0..packets.len()).collect();
    loop {
        if kept.is_empty() {
            break;
        }
        let mut mean = vec![0.0; k];
        for &i in &kept {
            for (m, a) in mean.iter_mut().zip(&packets[i]) {
                *m += a;
            }
        }
        let n = kept.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let next: Vec<usize> = kept
            .iter()
            .copied()
            .filter(|&i| {
                let d2: f64 = packets[i].iter().zip(&mean).map(|(a, m)| (a - m).powi(2)).sum();
                d2.sqrt() <= tau_d
            })
            .collect();
        if next.len() == kept.len() {
            break;
        }
        kept = next;
    }
    let mut is_kept = vec![false; packets.len()];
    kept.iter().for_each(|&i| is_kept[i] = true);
    let discarded = (0..packets.len()).filter(|&i| !is_kept[i]).collect();
    Ok((kept, discarded))
}
