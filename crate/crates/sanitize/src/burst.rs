/// Greedy burst thinning over time-ordered timestamps: the first packet is
/// kept, and each later packet is kept iff it is at least `t_b_us` after the
/// last kept packet. Returns the kept indices.
pub fn filter_bursts(ts: &[i64], t_b_us: i64) -> Vec<usize> {
    let mut kept = Vec::with_capacity(ts.len());
    let mut last: Option<i64> = None;
    for (i, &t) in ts.iter().enumerate() {
        if last.is_none_or(|l| t - l >= t_b_us) {
            kept.push(i);
            last = Some(t);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_traffic_untouched() {
        let ts: Vec<i64> = (0..50).map(|k| k * 20_000).collect();
        assert_eq!(filter_bursts(&ts, 10_000).len(), 50);
    }

    #[test]
    fn burst_collapses_to_first_packet() {
        let mut ts: Vec<i64> = (0..10).map(|k| k * 1_000).collect();
        ts.push(500_000);
        assert_eq!(filter_bursts(&ts, 10_000), vec![0, 10]);
    }

    #[test]
    fn sustained_fast_stream_keeps_every_tenth() {
        // A raw-predecessor rule would keep only the first packet here.
        let ts: Vec<i64> = (0..100).map(|k| k * 1_000).collect();
        assert_eq!(filter_bursts(&ts, 10_000), (0..10).map(|k| k * 10).collect::<Vec<_>>());
    }

    #[test]
    fn zero_threshold_is_identity() {
        let ts = vec![0, 0, 1, 5, 5, 9];
        assert_eq!(filter_bursts(&ts, 0), (0..6).collect::<Vec<_>>());
    }
}
