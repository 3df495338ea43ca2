//! Timestamp sparsity (MR), timestamp irregularity (SCV) and amplitude
//! stability (ACV).

use crate::error::{CsiError, Result};

/// 10 ms bins, i.e. a 100 Hz reference grid.
pub const DEFAULT_MR_BIN_US: i64 = 10_000;

/// Fraction of `bin_us` bins over `[0, duration_us)` that hold no timestamp.
/// Only whole bins are counted; a tail shorter than one bin is ignored, as are
/// timestamps falling in it.
pub fn compute_mr(timestamps: &[i64], duration_us: i64, bin_us: i64) -> Result<f64> {
    if bin_us <= 0 {
        return Err(CsiError::Arg(format!("bin size {bin_us} must be positive")));
    }
    if duration_us < bin_us {
        return Err(CsiError::Arg(format!(
            "duration {duration_us} us shorter than one {bin_us} us bin"
        )));
    }
    let bins = (duration_us / bin_us) as usize;
    let mut occupied = vec![false; bins];
    for &t in timestamps {
        if t < 0 || t >= duration_us {
            return Err(CsiError::Arg(format!(
                "timestamp {t} outside [0, {duration_us})"
            )));
        }
        if let Some(b) = occupied.get_mut((t / bin_us) as usize) {
            *b = true;
        }
    }
    let empty = occupied.iter().filter(|b| !**b).count();
    Ok(empty as f64 / bins as f64)
}

/// MR of absolute timestamps measured over the span `[start_us, end_us]`.
///
/// Timestamps are shifted to `start_us` and the duration is the inclusive
/// span, so a gap-free 100 Hz sequence scores exactly 0. Using one span for
/// several subsets of a stream puts them on a common bin grid.
pub fn stream_mr(timestamps: &[i64], start_us: i64, end_us: i64, bin_us: i64) -> Result<f64> {
    let rel: Vec<i64> = timestamps.iter().map(|t| t - start_us).collect();
    compute_mr(&rel, end_us - start_us + 1, bin_us)
}

/// Population standard deviation of the inter-packet intervals divided by
/// their mean.
pub fn compute_scv(timestamps: &[i64]) -> Result<f64> {
    if timestamps.len() < 3 {
        return Err(CsiError::Arg(format!(
            "SCV needs at least 3 timestamps, got {}",
            timestamps.len()
        )));
    }
    let gaps: Vec<f64> = timestamps
        .windows(2)
        .map(|w| (w[1] - w[0]) as f64)
        .collect();
    if gaps.iter().any(|&g| g < 0.0) {
        return Err(CsiError::Arg("timestamps must be sorted".into()));
    }
    let (mean, std) = mean_pop_std(&gaps);
    if mean == 0.0 {
        return Err(CsiError::Degenerate("mean inter-packet interval is zero".into()));
    }
    Ok(std / mean)
}

/// Mean over subcarrier columns of the per-column coefficient of variation
/// (population std / mean). `rows` is a `T × K` matrix; zero-mean columns are
/// left out of the average.
pub fn compute_acv(rows: &[Vec<f64>]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(CsiError::Arg(format!("ACV needs at least 2 rows, got {}", rows.len())));
    }
    let k = rows[0].len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(CsiError::Arg("ACV needs a non-empty rectangular matrix".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CsiError::Arg("ACV input must be finite".into()));
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut col = vec![0.0; rows.len()];
    for j in 0..k {
        for (c, r) in col.iter_mut().zip(rows) {
            *c = r[j];
        }
        let (mean, std) = mean_pop_std(&col);
        if mean != 0.0 {
            sum += std / mean.abs();
            used += 1;
        }
    }
    if used == 0 {
        return Err(CsiError::Degenerate("every column has zero mean".into()));
    }
    Ok(sum / used as f64)
}

fn mean_pop_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
