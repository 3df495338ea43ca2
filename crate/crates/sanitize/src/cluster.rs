use std::collections::BTreeMap;

use unifi_core::{ClusterKey, CsiStream};

/// Packets sharing (band, frame type, bandwidth).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub key: ClusterKey,
    /// Indices into the stream's packets, in time order.
    pub members: Vec<usize>,
}

/// Exact partition of the stream by PHY metadata, ordered by key.
pub fn cluster_by_meta(stream: &CsiStream) -> Vec<Cluster> {
    let mut groups: BTreeMap<ClusterKey, Vec<usize>> = BTreeMap::new();
    for (i, p) in stream.packets.iter().enumerate() {
        groups.entry(p.key()).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(key, members)| Cluster { key, members })
        .collect()
}

/// `CSI0`, `CSI1`, ... numbered within each band in key order.
pub(crate) fn cluster_names(clusters: &[Cluster]) -> Vec<String> {
    let mut per_band: BTreeMap<unifi_core::Band, usize> = BTreeMap::new();
    clusters
        .iter()
        .map(|c| {
            let n = per_band.entry(c.key.band).or_default();
            let name = format!("CSI{n}");
            *n += 1;
            name
        })
        .collect()
}
