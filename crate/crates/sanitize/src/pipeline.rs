use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use unifi_core::{
    compute_acv, compute_scv, stream_mr, window_ranges, Band, CanonicalGrid, ClusterKey, CsiStream,
    QualityMetrics, SanitizedWindow, SubcarrierGrids, DEFAULT_MR_BIN_US,
};

use crate::align::{align_clusters, apply_alignment, ClusterSeries};
use crate::burst::filter_bursts;
use crate::cluster::{cluster_by_meta, cluster_names};
use crate::config::{AlignReference, SanitizeConfig};
use crate::error::{Result, SanitizeError};
use crate::iss::{select_subcarriers, IssSelection};
use crate::normalize::{normalize_l2, prune_outliers};
use crate::report::{AlignmentSummary, BandReport, ClusterReport, SanitizeReport, StageCounts};

/// Label given to windows of unlabeled streams.
pub const UNLABELED: u32 = u32::MAX;

/// A packet that survived stages (i)–(iv).
#[derive(Debug, Clone, PartialEq)]
pub struct SanitizedPacket {
    pub t_us: i64,
    pub key: ClusterKey,
    /// Index of the packet in the input stream.
    pub source: usize,
    pub sc_idx: Vec<i32>,
    pub amp: Vec<f64>,
}

/// Output of stages (i)–(iv): the surviving packets of all clusters in time
/// order, ready for windowing and subcarrier selection.
#[derive(Debug, Clone)]
pub struct PreparedStream {
    pub packets: Vec<SanitizedPacket>,
    pub grids: SubcarrierGrids,
    pub grid: CanonicalGrid,
    pub label: Option<u32>,
    pub report: SanitizeReport,
    raw_ts: Vec<i64>,
}

impl PreparedStream {
    /// Windows placed on the raw stream's timeline (so toggling a stage
    /// never moves them): `(t0, range into packets)` for every raw window,
    /// including ones left empty by sanitization.
    pub fn window_ranges(&self, win_us: i64, stride_us: i64) -> Result<Vec<(i64, Range<usize>)>> {
        let raw = window_ranges(&self.raw_ts, win_us, stride_us)?;
        Ok(raw
            .into_iter()
            .map(|(t0, _)| {
                let lo = self.packets.partition_point(|p| p.t_us < t0);
                let hi = self.packets.partition_point(|p| p.t_us < t0 + win_us);
                (t0, lo..hi)
            })
            .collect())
    }

    pub fn window_label(&self) -> u32 {
        self.label.unwrap_or(UNLABELED)
    }
}

fn metrics(ts: &[i64], span: (i64, i64), acv: Option<f64>) -> Result<QualityMetrics> {
    let mr = stream_mr(ts, span.0, span.1, DEFAULT_MR_BIN_US)?;
    let scv = if ts.len() >= 3 { compute_scv(ts).ok() } else { None };
    Ok(QualityMetrics { mr, scv, acv })
}

fn acv_of(s: &ClusterSeries) -> Option<f64> {
    compute_acv(&s.amps).ok()
}

/// Stages (i)–(iv): clustering, normalization and pruning, alignment and
/// burst filtering.
pub fn prepare(stream: &CsiStream, cfg: &SanitizeConfig) -> Result<PreparedStream> {
    cfg.validate()?;
    stream.validate()?;
    let raw_ts = stream.timestamps();
    let span = match (raw_ts.first(), raw_ts.last()) {
        // A span shorter than one MR bin is widened so metrics stay defined.
        (Some(&a), Some(&b)) => (a, b.max(a + DEFAULT_MR_BIN_US - 1)),
        _ => return Err(SanitizeError::EmptyCluster),
    };
    let clusters = cluster_by_meta(stream);
    let names = cluster_names(&clusters);
    let mut counts = StageCounts { input_packets: stream.len(), ..Default::default() };

    let mut series = Vec::with_capacity(clusters.len());
    let mut reports = Vec::with_capacity(clusters.len());
    for (c, name) in clusters.iter().zip(names) {
        let mut s = ClusterSeries::from_stream(stream, c)?;
        let raw = metrics(&s.t_us, span, acv_of(&s))?;

        let mut ok = Vec::with_capacity(s.len());
        for (i, a) in s.amps.iter_mut().enumerate() {
            if let Ok(n) = normalize_l2(a) {
                *a = n;
                ok.push(i);
            }
        }
        let degenerate = s.len() - ok.len();
        s.retain_indices(&ok);

        let mut pruned = 0;
        if cfg.enable_outlier_pruning && !s.is_empty() {
            let (kept, dropped) = prune_outliers(&s.amps, cfg.tau_d)?;
            pruned = dropped.len();
            s.retain_indices(&kept);
        }
        let normalized = metrics(&s.t_us, span, acv_of(&s))?;
        counts.degenerate_dropped += degenerate;
        counts.outliers_pruned += pruned;
        reports.push(ClusterReport {
            name,
            key: c.key,
            packets_in: c.members.len(),
            packets_out: 0,
            degenerate_dropped: degenerate,
            outliers_pruned: pruned,
            burst_removed: 0,
            raw,
            normalized,
            sanitized: normalized,
            aligned_to: None,
        });
        series.push(s);
    }

    let mut alignments = Vec::new();
    if cfg.enable_alignment {
        for (src, reference) in alignment_plan(&series, &reports, cfg) {
            let summary = match align_clusters(&series[src], &series[reference], cfg.t_c_us) {
                Ok(map) => {
                    apply_alignment(&mut series[src], &map)?;
                    reports[src].aligned_to = Some(map.ref_key);
                    AlignmentSummary {
                        src: map.src_key,
                        reference: map.ref_key,
                        n_pairs: map.n_pairs,
                        gamma_mean: (!map.gamma.is_empty())
                            .then(|| map.gamma.iter().sum::<f64>() / map.gamma.len() as f64),
                        error: None,
                    }
                }
                Err(
                    e @ (SanitizeError::NoPairs { .. }
                    | SanitizeError::DivByZero { .. }
                    | SanitizeError::NoSharedSubcarriers { .. }),
                ) => AlignmentSummary {
                    src: series[src].key,
                    reference: series[reference].key,
                    n_pairs: 0,
                    gamma_mean: None,
                    error: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            };
            alignments.push(summary);
        }
    }

    for (s, r) in series.iter_mut().zip(&mut reports) {
        if cfg.enable_burst_filter {
            let kept = filter_bursts(&s.t_us, cfg.t_b_us);
            r.burst_removed = s.len() - kept.len();
            counts.burst_removed += r.burst_removed;
            s.retain_indices(&kept);
        }
        r.packets_out = s.len();
        r.sanitized = metrics(&s.t_us, span, acv_of(s))?;
    }

    let mut packets: Vec<SanitizedPacket> = series
        .iter()
        .flat_map(|s| {
            (0..s.len()).map(move |p| {
                let (sc_idx, amp) = s
                    .sc_idx
                    .iter()
                    .zip(&s.amps[p])
                    .zip(&s.present[p])
                    .filter(|(_, &on)| on)
                    .map(|((&sc, &a), _)| (sc, a))
                    .unzip();
                SanitizedPacket { t_us: s.t_us[p], key: s.key, source: s.source[p], sc_idx, amp }
            })
        })
        .collect();
    packets.sort_by_key(|p| (p.t_us, p.key));
    let before = packets.len();
    packets.dedup_by_key(|p| p.t_us);
    counts.timestamp_collisions = before - packets.len();
    counts.output_packets = packets.len();

    let bands: BTreeSet<Band> = clusters.iter().map(|c| c.key.band).collect();
    let mut band_reports = Vec::new();
    for band in bands {
        let raw: Vec<i64> = stream.packets.iter().filter(|p| p.band == band).map(|p| p.t_us).collect();
        let out: Vec<i64> = packets.iter().filter(|p| p.key.band == band).map(|p| p.t_us).collect();
        band_reports.push(BandReport {
            band,
            raw: metrics(&raw, span, None)?,
            sanitized: metrics(&out, span, None)?,
        });
    }

    Ok(PreparedStream {
        packets,
        grid: stream.grids.canonical(),
        grids: stream.grids.clone(),
        label: stream.label,
        report: SanitizeReport {
            config: cfg.clone(),
            counts,
            clusters: reports,
            bands: band_reports,
            alignments,
            iss: None,
        },
        raw_ts,
    })
}

/// `(src, reference)` index pairs. Within a band, clusters linked by a
/// compatible frame-type pair and at least one shared tone form a group;
/// every other member of a group is aligned directly to its reference.
fn alignment_plan(series: &[ClusterSeries], reports: &[ClusterReport], cfg: &SanitizeConfig) -> Vec<(usize, usize)> {
    let n = series.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            let (ka, kb) = (series[a].key, series[b].key);
            let share = series[a].sc_idx.iter().any(|sc| series[b].sc_idx.binary_search(sc).is_ok());
            if ka.band == kb.band
                && cfg.compatible(ka.frame_type, kb.frame_type)
                && share
                && !series[a].is_empty()
                && !series[b].is_empty()
            {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut plan = Vec::new();
    for members in groups.values().filter(|m| m.len() > 1) {
        let reference = *members
            .iter()
            .min_by(|&&a, &&b| match cfg.align_reference {
                AlignReference::LowerMr => reports[a].normalized.mr.total_cmp(&reports[b].normalized.mr),
                AlignReference::MorePackets => series[b].len().cmp(&series[a].len()),
            })
            .expect("non-empty group");
        plan.extend(members.iter().filter(|&&m| m != reference).map(|&m| (m, reference)));
    }
    plan
}

impl IssSelection {
    /// Fits the selection on the given windows of prepared packets. Grids
    /// of 20 MHz are never reduced; grids with no window of at least 3
    /// packets of one cluster are left unreduced too.
    pub fn fit(windows: &[&[SanitizedPacket]], grids: &SubcarrierGrids, k_sel: usize) -> Result<Self> {
        let mut out = IssSelection::default();
        for (band, bw, layout) in grids.layouts() {
            if bw <= 20 {
                continue;
            }
            let mut mats = Vec::new();
            for w in windows {
                let mut per_key: BTreeMap<ClusterKey, Vec<Vec<f64>>> = BTreeMap::new();
                for p in w.iter().filter(|p| p.key.band == band && p.key.bw_mhz == bw) {
                    let mut row = vec![0.0; layout.len()];
                    for (sc, a) in p.sc_idx.iter().zip(&p.amp) {
                        if let Ok(k) = layout.binary_search(sc) {
                            row[k] = *a;
                        }
                    }
                    per_key.entry(p.key).or_default().push(row);
                }
                mats.extend(per_key.into_values().filter(|m| m.len() >= 3));
            }
            if mats.is_empty() {
                continue;
            }
            let picked = select_subcarriers(&mats, k_sel)?;
            out.selected.insert(
                IssSelection::grid_name(band, bw),
                picked.into_iter().map(|k| layout[k]).collect(),
            );
        }
        Ok(out)
    }
}

/// Lays the packets of one window onto the canonical grid. Tones outside a
/// packet's (selected) subcarriers are zero and masked. Returns `None` when
/// no row survives, plus the number of rows emptied by the selection.
pub fn build_window(
    packets: &[SanitizedPacket],
    t0_us: i64,
    win_us: i64,
    grid: &CanonicalGrid,
    label: u32,
    iss: Option<&IssSelection>,
) -> Result<(Option<SanitizedWindow>, usize)> {
    let g = grid.len();
    let mut values = Vec::with_capacity(packets.len() * g);
    let mut masks = Vec::with_capacity(packets.len() * g);
    let mut ts = Vec::with_capacity(packets.len());
    let mut emptied = 0;
    for p in packets {
        let mut v = vec![0.0; g];
        let mut m = vec![false; g];
        for (&sc, &a) in p.sc_idx.iter().zip(&p.amp) {
            if iss.is_some_and(|s| !s.keeps(p.key.band, p.key.bw_mhz, sc)) {
                continue;
            }
            let k = grid.index_of(p.key.band, sc).ok_or_else(|| {
                SanitizeError::Arg(format!("subcarrier {sc} missing from the canonical grid"))
            })?;
            v[k] = a;
            m[k] = true;
        }
        if !m.iter().any(|&b| b) {
            emptied += 1;
            continue;
        }
        values.extend(v);
        masks.extend(m);
        ts.push((p.t_us - t0_us) as f64 / win_us as f64);
    }
    if ts.is_empty() {
        return Ok((None, emptied));
    }
    Ok((Some(SanitizedWindow::new(t0_us, win_us, g, values, masks, ts, label)?), emptied))
}

/// All five stages over one stream, cut into `win_us` windows every
/// `stride_us`. With `cfg.k_sel` set, the selection is fitted on this
/// stream's own windows; callers holding out test data should use
/// [`prepare`], [`IssSelection::fit`] and [`build_window`] instead.
pub fn sanitize_pipeline(
    stream: &CsiStream,
    cfg: &SanitizeConfig,
    win_us: i64,
    stride_us: i64,
) -> Result<(Vec<SanitizedWindow>, SanitizeReport)> {
    let prepared = prepare(stream, cfg)?;
    let ranges = prepared.window_ranges(win_us, stride_us)?;
    let slices: Vec<&[SanitizedPacket]> = ranges.iter().map(|(_, r)| &prepared.packets[r.clone()]).collect();
    let iss = match cfg.k_sel {
        Some(k) => Some(IssSelection::fit(&slices, &prepared.grids, k)?),
        None => None,
    };
    let mut report = prepared.report.clone();
    let mut windows = Vec::new();
    for ((t0, _), packets) in ranges.iter().zip(&slices) {
        let (w, emptied) =
            build_window(packets, *t0, win_us, &prepared.grid, prepared.window_label(), iss.as_ref())?;
        report.counts.iss_rows_dropped += emptied;
        match w {
            Some(w) => windows.push(w),
            None => report.counts.windows_dropped += 1,
        }
    }
    report.counts.windows_emitted = windows.len();
    report.iss = iss;
    Ok((windows, report))
}
