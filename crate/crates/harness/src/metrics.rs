use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unifi_core::{compute_acv, compute_scv, stream_mr, Band, ClusterKey, CsiStream, QualityMetrics, DEFAULT_MR_BIN_US};

use crate::error::{HarnessError, Result, StageExt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMetrics {
    pub key: ClusterKey,
    pub packets: usize,
    pub metrics: QualityMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// MR bins are laid over this span for every entry, so the union's MR
    /// can be compared bin for bin with the clusters'.
    pub span_us: (i64, i64),
    pub clusters: Vec<ClusterMetrics>,
    /// All clusters of one band together.
    pub bands: BTreeMap<String, QualityMetrics>,
    /// Every packet of the stream.
    pub merged: QualityMetrics,
}

fn quality(ts: &[i64], span: (i64, i64)) -> Result<QualityMetrics> {
    let mr = stream_mr(ts, span.0, span.1, DEFAULT_MR_BIN_US).stage("metrics")?;
    let scv = if ts.len() >= 3 { compute_scv(ts).ok() } else { None };
    Ok(QualityMetrics { mr, scv, acv: None })
}

/// Raw MR/SCV per cluster, per band and over the whole stream. With
/// `static_scene`, each cluster's ACV is added too (only meaningful when
/// nothing moves).
pub fn cmd_metrics(stream: &CsiStream, static_scene: bool) -> Result<MetricsReport> {
    let ts = stream.timestamps();
    let (Some(&first), Some(&last)) = (ts.first(), ts.last()) else {
        return Err(HarnessError::Runtime("stream has no packets".into()));
    };
    let span = (first, last);
    let mut by_key: BTreeMap<ClusterKey, (Vec<i64>, Vec<Vec<f64>>)> = BTreeMap::new();
    let mut by_band: BTreeMap<Band, Vec<i64>> = BTreeMap::new();
    for p in &stream.packets {
        let e = by_key.entry(p.key()).or_default();
        e.0.push(p.t_us);
        e.1.push(p.amp.clone());
        by_band.entry(p.band).or_default().push(p.t_us);
    }
    let mut clusters = Vec::with_capacity(by_key.len());
    for (key, (t, amps)) in by_key {
        let mut metrics = quality(&t, span)?;
        if static_scene {
            metrics.acv = compute_acv(&amps).ok();
        }
        clusters.push(ClusterMetrics { key, packets: t.len(), metrics });
    }
    let bands = by_band
        .into_iter()
        .map(|(b, t)| Ok((b.as_str().to_string(), quality(&t, span)?)))
        .collect::<Result<_>>()?;
    Ok(MetricsReport { span_us: span, clusters, bands, merged: quality(&ts, span)? })
}
