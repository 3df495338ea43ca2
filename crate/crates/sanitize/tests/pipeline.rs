use std::collections::BTreeSet;

use unifi_core::{Band, CsiStream, FrameType, SubcarrierGrids};
use unifi_sanitize::{normalize_l2, prepare, sanitize_pipeline, SanitizeConfig};
use unifi_synth::{
    emit_stream, Arrival, GainModel, ImpairmentConfig, Mover, SceneConfig, StaticPath,
    TrafficCluster, TrafficConfig,
};

const WIN: i64 = 4_000_000;

fn grids() -> SubcarrierGrids {
    SubcarrierGrids::compact(32, 8, 8).unwrap()
}

fn scene(mover: bool) -> SceneConfig {
    SceneConfig {
        static_paths: vec![
            StaticPath { delay_ns: 0.0, gain: 1.0 },
            StaticPath { delay_ns: 45.0, gain: 0.5 },
        ],
        mover: mover.then_some(Mover { doppler_hz: 6.0, path_gain: 0.4, reflect_delay_ns: 25.0 }),
        motion_class: 2,
        noise_sigma: 0.0,
    }
}

fn source(id: &str, band: Band, ft: FrameType, bw: u16, arrival: Arrival) -> TrafficCluster {
    TrafficCluster { cluster_id: id.into(), band, frame_type: ft, bw_mhz: bw, arrival }
}

fn bursty(gap_ms: f64) -> Arrival {
    Arrival::Bursty { burst_rate_hz: 1000.0, burst_len: 6, gap_ms, gap_jitter: 0.5 }
}

/// Bursts of 0.2 ms spacing, well inside one MR bin.
fn tight_bursts(gap_ms: f64) -> Arrival {
    Arrival::Bursty { burst_rate_hz: 5000.0, burst_len: 6, gap_ms, gap_jitter: 0.5 }
}

fn emit(clusters: Vec<TrafficCluster>, duration_s: f64, mover: bool, imp: &ImpairmentConfig) -> CsiStream {
    let traffic = TrafficConfig { clusters, duration_s };
    emit_stream(&grids(), &scene(mover), &traffic, imp, 17).unwrap()
}

#[test]
fn clean_fixed_rate_stream_passes_through() {
    let stream = emit(
        vec![source("d", Band::Band5G, FrameType::Data, 80, Arrival::Periodic { rate_hz: 100.0 })],
        12.0,
        true,
        &ImpairmentConfig::default(),
    );
    let (windows, report) = sanitize_pipeline(&stream, &SanitizeConfig::default(), WIN, WIN).unwrap();
    assert_eq!(windows.len(), 3);
    assert_eq!(report.counts.outliers_pruned + report.counts.burst_removed, 0);
    assert_eq!(report.counts.output_packets, stream.len());
    let grid = stream.grids.canonical();
    let mut packets = stream.packets.iter();
    for w in &windows {
        assert_eq!(w.rows(), 400);
        for q in 0..w.rows() {
            let p = packets.next().unwrap();
            assert_eq!(w.ts[q], (p.t_us - w.t0_us) as f64 / WIN as f64);
            let n = normalize_l2(&p.amp).unwrap();
            for (sc, a) in p.sc_idx.iter().zip(n) {
                let k = grid.index_of(p.band, *sc).unwrap();
                assert!(w.mask_row(q)[k]);
                assert!((w.row(q)[k] - a).abs() < 1e-15);
            }
            assert_eq!(w.mask_row(q).iter().filter(|m| **m).count(), p.sc_idx.len());
        }
    }
}

#[test]
fn static_capture_quality_trend() {
    // Two minutes of a static 20 MHz link: beacons plus bursty data, per
    // packet gain drift and a little amplitude error.
    let imp = ImpairmentConfig {
        gain: GainModel::Ar1 { lo: 0.4, hi: 2.5, rho: 0.3 },
        error_sigma: 0.002,
        ..Default::default()
    };
    let stream = emit(
        vec![
            source("beacon", Band::Band5G, FrameType::Mgmt, 20, Arrival::Periodic { rate_hz: 10.0 }),
            source("data", Band::Band5G, FrameType::Data, 20, tight_bursts(30.0)),
        ],
        120.0,
        false,
        &imp,
    );
    let prepared = prepare(&stream, &SanitizeConfig::default()).unwrap();
    let r = &prepared.report;
    for c in &r.clusters {
        let (raw, norm) = (c.raw.acv.unwrap(), c.normalized.acv.unwrap());
        assert!(norm < 0.2 * raw, "{}: ACV {raw} -> {norm}", c.name);
    }
    let data = r.clusters.iter().find(|c| c.key.frame_type == FrameType::Data).unwrap();
    let (before, after) = (data.normalized, data.sanitized);
    assert!(data.burst_removed > 0);
    assert!(after.scv.unwrap() < 0.5 * before.scv.unwrap(), "{before:?} -> {after:?}");
    assert!(after.mr - before.mr <= 0.05, "{before:?} -> {after:?}");
}

fn dual_band() -> CsiStream {
    emit(
        vec![
            source("beacon5", Band::Band5G, FrameType::Mgmt, 20, Arrival::Periodic { rate_hz: 10.0 }),
            source("ack5", Band::Band5G, FrameType::Ctrl, 20, Arrival::Poisson { rate_hz: 25.0 }),
            source("video5", Band::Band5G, FrameType::Data, 80, bursty(50.0)),
            source("beacon24", Band::Band2G4, FrameType::Mgmt, 20, Arrival::Periodic { rate_hz: 10.0 }),
            source("ack24", Band::Band2G4, FrameType::Ctrl, 20, Arrival::Poisson { rate_hz: 15.0 }),
            source("data24", Band::Band2G4, FrameType::Data, 20, bursty(70.0)),
        ],
        40.0,
        true,
        &ImpairmentConfig { gain: GainModel::LogUniform { lo: 0.5, hi: 2.0 }, ..Default::default() },
    )
}

#[test]
fn dual_band_mix_merges_clusters() {
    let stream = dual_band();
    let (windows, report) = sanitize_pipeline(&stream, &SanitizeConfig::default(), WIN, WIN).unwrap();

    let names: Vec<(Band, &str)> = report.clusters.iter().map(|c| (c.key.band, c.name.as_str())).collect();
    assert_eq!(
        names,
        vec![
            (Band::Band2G4, "CSI0"),
            (Band::Band2G4, "CSI1"),
            (Band::Band2G4, "CSI2"),
            (Band::Band5G, "CSI0"),
            (Band::Band5G, "CSI1"),
            (Band::Band5G, "CSI2"),
        ]
    );
    for b in &report.bands {
        let best = report
            .clusters
            .iter()
            .filter(|c| c.key.band == b.band)
            .map(|c| c.sanitized.mr)
            .fold(f64::INFINITY, f64::min);
        assert!(b.sanitized.mr < best, "{:?}: merged {} vs {best}", b.band, b.sanitized.mr);
    }
    // mgmt and ctrl are aligned in each band.
    assert_eq!(report.alignments.len(), 2);
    assert!(report.alignments.iter().all(|a| a.error.is_none() && a.n_pairs > 0));

    let rows: BTreeSet<usize> = windows.iter().map(|w| w.rows()).collect();
    assert!(rows.len() > 1, "T' should vary across windows");
    assert_eq!(windows.len(), 10);
    assert!(windows.iter().all(|w| w.label == 2));
}

#[test]
fn rows_map_to_distinct_input_packets() {
    let stream = dual_band();
    let prepared = prepare(&stream, &SanitizeConfig::default()).unwrap();
    let sources: BTreeSet<usize> = prepared.packets.iter().map(|p| p.source).collect();
    assert_eq!(sources.len(), prepared.packets.len());
    for p in &prepared.packets {
        let orig = &stream.packets[p.source];
        assert_eq!((orig.t_us, orig.key()), (p.t_us, p.key));
        assert_eq!(orig.sc_idx, p.sc_idx);
    }
    let c = &prepared.report.counts;
    assert_eq!(
        c.input_packets,
        c.output_packets + c.degenerate_dropped + c.outliers_pruned + c.burst_removed + c.timestamp_collisions
    );
}

#[test]
fn subcarrier_selection_budget() {
    let stream = dual_band();
    let cfg = SanitizeConfig { k_sel: Some(4), ..Default::default() };
    let (windows, report) = sanitize_pipeline(&stream, &cfg, WIN, WIN).unwrap();
    let iss = report.iss.as_ref().unwrap();
    assert_eq!(iss.selected.len(), 1, "only the 80 MHz grid is reduced");
    let picked = iss.get(Band::Band5G, 80).unwrap();
    assert_eq!(picked.len(), 4);
    let layout = stream.grids.layout(Band::Band5G, 80).unwrap();
    assert!(picked.iter().all(|sc| layout.contains(sc)));

    let grid = stream.grids.canonical();
    let wide: Vec<usize> = layout.iter().map(|&sc| grid.index_of(Band::Band5G, sc).unwrap()).collect();
    let narrow: Vec<usize> = stream
        .grids
        .layout(Band::Band5G, 20)
        .unwrap()
        .iter()
        .map(|&sc| grid.index_of(Band::Band5G, sc).unwrap())
        .collect();
    let mut seen_wide = 0;
    for w in &windows {
        for q in 0..w.rows() {
            let on: Vec<usize> = (0..w.grid_size).filter(|&k| w.mask_row(q)[k]).collect();
            if on.len() == 4 && on.iter().all(|k| wide.contains(k)) {
                seen_wide += 1;
            } else {
                assert!(on.len() == narrow.len() || on.len() == 8, "{on:?}");
            }
        }
    }
    assert!(seen_wide > 0);
}

#[test]
fn burst_filter_toggle_changes_packet_count_only() {
    let stream = dual_band();
    let on = prepare(&stream, &SanitizeConfig::default()).unwrap();
    let off = prepare(&stream, &SanitizeConfig { enable_burst_filter: false, ..Default::default() }).unwrap();
    assert!(off.packets.len() as f64 > 1.5 * on.packets.len() as f64);
    assert_eq!(off.report.counts.burst_removed, 0);
    let a: Vec<i64> = on.window_ranges(WIN, WIN).unwrap().iter().map(|w| w.0).collect();
    let b: Vec<i64> = off.window_ranges(WIN, WIN).unwrap().iter().map(|w| w.0).collect();
    assert_eq!(a, b);
}

#[test]
fn report_round_trips_through_json() {
    let (_, report) = sanitize_pipeline(&dual_band(), &SanitizeConfig::default(), WIN, WIN).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: unifi_sanitize::SanitizeReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}

#[test]
fn config_validation() {
    let bad = [
        SanitizeConfig { tau_d: 0.0, ..Default::default() },
        SanitizeConfig { t_b_us: -1, ..Default::default() },
        SanitizeConfig { t_c_us: 0, ..Default::default() },
        SanitizeConfig { k_sel: Some(0), ..Default::default() },
    ];
    for c in bad {
        assert!(c.validate().is_err(), "{c:?}");
    }
    let parsed: SanitizeConfig = serde_json::from_str(r#"{"tau_d": 0.5}"#).unwrap();
    assert_eq!(parsed.t_b_us, 10_000);
}
