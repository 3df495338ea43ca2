use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CsiError, Result};

/// Frequency band of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "2g4")]
    Band2G4,
    #[serde(rename = "5g")]
    Band5G,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::Band2G4 => "2g4",
            Band::Band5G => "5g",
        }
    }

    pub fn parse(s: &str) -> Option<Band> {
        match s {
            "2g4" => Some(Band::Band2G4),
            "5g" => Some(Band::Band5G),
            _ => None,
        }
    }

    /// Center frequency (Hz) of the channel the synthetic grids are laid on.
    pub fn center_hz(self) -> f64 {
        match self {
            Band::Band2G4 => 2.437e9,
            Band::Band5G => 5.210e9,
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 802.11 frame category. The variant order (management, control, data) is
/// the cluster ordering used everywhere, so periodic beacons come first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameType {
    Mgmt,
    Ctrl,
    Data,
}

impl FrameType {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameType::Mgmt => "mgmt",
            FrameType::Ctrl => "ctrl",
            FrameType::Data => "data",
        }
    }

    pub fn parse(s: &str) -> Option<FrameType> {
        match s {
            "mgmt" => Some(FrameType::Mgmt),
            "ctrl" => Some(FrameType::Ctrl),
            "data" => Some(FrameType::Data),
            _ => None,
        }
    }
}

impl fmt::Display for FrameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const VALID_BANDWIDTHS: [u16; 3] = [20, 40, 80];

pub fn check_bandwidth(bw_mhz: u16) -> Result<()> {
    if VALID_BANDWIDTHS.contains(&bw_mhz) {
        Ok(())
    } else {
        Err(CsiError::Arg(format!("bandwidth {bw_mhz} MHz not in {{20, 40, 80}}")))
    }
}

/// PHY metadata a packet is clustered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterKey {
    pub band: Band,
    pub frame_type: FrameType,
    pub bw_mhz: u16,
}

impl fmt::Display for ClusterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/bw{}", self.band, self.frame_type, self.bw_mhz)
    }
}

/// One CSI observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    /// Microseconds since the stream epoch.
    pub t_us: i64,
    pub band: Band,
    pub frame_type: FrameType,
    pub bw_mhz: u16,
    /// Indices on the band's subcarrier grid, strictly increasing.
    pub sc_idx: Vec<i32>,
    /// Non-negative amplitudes, one per entry of `sc_idx`.
    pub amp: Vec<f64>,
}

impl PacketRecord {
    pub fn key(&self) -> ClusterKey {
        ClusterKey {
            band: self.band,
            frame_type: self.frame_type,
            bw_mhz: self.bw_mhz,
        }
    }

    /// Checks the record invariants against the declared grids. The error is
    /// a plain message; callers attach location information.
    pub fn validate(&self, grids: &SubcarrierGrids) -> std::result::Result<(), String> {
        if !VALID_BANDWIDTHS.contains(&self.bw_mhz) {
            return Err(format!("bandwidth {} not in {{20, 40, 80}}", self.bw_mhz));
        }
        if self.t_us < 0 {
            return Err(format!("negative timestamp {}", self.t_us));
        }
        if self.sc_idx.is_empty() {
            return Err("empty subcarrier list".into());
        }
        if self.sc_idx.len() != self.amp.len() {
            return Err(format!(
                "len(a) = {} differs from len(sc) = {}",
                self.amp.len(),
                self.sc_idx.len()
            ));
        }
        if self.sc_idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err("subcarrier indices not strictly increasing".into());
        }
        if let Some(a) = self.amp.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(format!("amplitude {a} is not a finite non-negative number"));
        }
        let layout = grids.layout(self.band, self.bw_mhz).ok_or_else(|| {
            format!("no grid declared for {} bw{}", self.band, self.bw_mhz)
        })?;
        if let Some(i) = self.sc_idx.iter().find(|i| layout.binary_search(i).is_err()) {
            return Err(format!(
                "subcarrier {i} outside the {} bw{} grid",
                self.band, self.bw_mhz
            ));
        }
        Ok(())
    }

    /// Sort key: timestamp, then PHY metadata.
    pub fn order_key(&self) -> (i64, ClusterKey) {
        (self.t_us, self.key())
    }
}

/// Subcarrier index layouts per (band, bandwidth), as declared in a stream
/// header. Serialized as `{"5g": {"bw80": [...], "bw20": [...]}, ...}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubcarrierGrids {
    layouts: BTreeMap<(Band, u16), Vec<i32>>,
}

impl SubcarrierGrids {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a layout; indices are sorted and deduplicated.
    pub fn with_layout(mut self, band: Band, bw_mhz: u16, mut idx: Vec<i32>) -> Result<Self> {
        check_bandwidth(bw_mhz)?;
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return Err(CsiError::Grid(format!("empty layout for {band} bw{bw_mhz}")));
        }
        self.layouts.insert((band, bw_mhz), idx);
        Ok(self)
    }

    pub fn layout(&self, band: Band, bw_mhz: u16) -> Option<&[i32]> {
        self.layouts.get(&(band, bw_mhz)).map(Vec::as_slice)
    }

    pub fn layouts(&self) -> impl Iterator<Item = (Band, u16, &[i32])> {
        self.layouts.iter().map(|(&(b, bw), v)| (b, bw, v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.layouts.is_empty()
    }

    /// The union of every declared layout, ordered by (band, index).
    pub fn canonical(&self) -> CanonicalGrid {
        let mut positions: Vec<(Band, i32)> = self
            .layouts
            .iter()
            .flat_map(|(&(band, _), idx)| idx.iter().map(move |&i| (band, i)))
            .collect();
        positions.sort_unstable();
        positions.dedup();
        CanonicalGrid { positions }
    }

    /// Evenly spaced layouts used by the synthetic generators: an 80 MHz grid
    /// of `n80` tones on 5 GHz whose central `n20` tones form the 20 MHz
    /// layout, and a separate `n24`-tone 20 MHz grid on 2.4 GHz.
    pub fn compact(n80: usize, n20: usize, n24: usize) -> Result<Self> {
        if n20 > n80 {
            return Err(CsiError::Grid("20 MHz layout larger than 80 MHz layout".into()));
        }
        let bw80 = symmetric_tones(n80, 122);
        let skip = (n80 - n20) / 2;
        let bw20 = bw80[skip..skip + n20].to_vec();
        let b24 = symmetric_tones(n24, 28);
        SubcarrierGrids::new()
            .with_layout(Band::Band5G, 80, bw80)?
            .with_layout(Band::Band5G, 20, bw20)?
            .with_layout(Band::Band2G4, 20, b24)
    }
}

/// `n` distinct nonzero tone indices spread evenly over `[-edge, edge]`.
fn symmetric_tones(n: usize, edge: i32) -> Vec<i32> {
    let half = n / 2;
    let step = (edge / half.max(1) as i32).max(1);
    let mut neg: Vec<i32> = (1..=half as i32).map(|k| -k * step).collect();
    neg.reverse();
    let pos_count = n - half;
    let pos = (1..=pos_count as i32).map(|k| k * step);
    neg.into_iter().chain(pos).collect()
}

impl Serialize for SubcarrierGrids {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut nested: BTreeMap<&str, BTreeMap<String, &Vec<i32>>> = BTreeMap::new();
        for (&(band, bw), idx) in &self.layouts {
            nested
                .entry(band.as_str())
                .or_default()
                .insert(format!("bw{bw}"), idx);
        }
        nested.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SubcarrierGrids {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let nested: BTreeMap<String, BTreeMap<String, Vec<i32>>> =
            BTreeMap::deserialize(deserializer)?;
        let mut grids = SubcarrierGrids::new();
        for (band_s, per_bw) in nested {
            let band = Band::parse(&band_s)
                .ok_or_else(|| D::Error::custom(format!("unknown band {band_s:?}")))?;
            for (bw_s, idx) in per_bw {
                let bw: u16 = bw_s
                    .strip_prefix("bw")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| D::Error::custom(format!("bad bandwidth key {bw_s:?}")))?;
                grids = grids
                    .with_layout(band, bw, idx)
                    .map_err(|e| D::Error::custom(e.to_string()))?;
            }
        }
        Ok(grids)
    }
}

/// Ordered union of all (band, subcarrier) positions; column space of
/// [`SanitizedWindow`] values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGrid {
    positions: Vec<(Band, i32)>,
}

impl CanonicalGrid {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn index_of(&self, band: Band, sc: i32) -> Option<usize> {
        self.positions.binary_search(&(band, sc)).ok()
    }

    pub fn positions(&self) -> &[(Band, i32)] {
        &self.positions
    }
}

/// Time-ordered packet sequence plus header metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiStream {
    pub epoch_us: i64,
    pub grids: SubcarrierGrids,
    pub packets: Vec<PacketRecord>,
    pub label: Option<u32>,
    pub subject_id: Option<String>,
}

impl CsiStream {
    pub fn new(epoch_us: i64, grids: SubcarrierGrids) -> Self {
        Self {
            epoch_us,
            grids,
            packets: Vec::new(),
            label: None,
            subject_id: None,
        }
    }

    /// Sorts packets into canonical order (stable).
    pub fn sort_packets(&mut self) {
        self.packets.sort_by_key(PacketRecord::order_key);
    }

    pub fn duration_us(&self) -> i64 {
        match (self.packets.first(), self.packets.last()) {
            (Some(a), Some(b)) => b.t_us - a.t_us,
            _ => 0,
        }
    }

    pub fn timestamps(&self) -> Vec<i64> {
        self.packets.iter().map(|p| p.t_us).collect()
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    /// Copy of the stream restricted to packets satisfying `keep`.
    pub fn filtered<F: Fn(&PacketRecord) -> bool>(&self, keep: F) -> CsiStream {
        CsiStream {
            epoch_us: self.epoch_us,
            grids: self.grids.clone(),
            packets: self.packets.iter().filter(|p| keep(p)).cloned().collect(),
            label: self.label,
            subject_id: self.subject_id.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.packets.iter().enumerate() {
            p.validate(&self.grids)
                .map_err(|reason| CsiError::Schema { line: i + 2, reason })?;
        }
        for (i, w) in self.packets.windows(2).enumerate() {
            if w[0].order_key() >= w[1].order_key() {
                return Err(CsiError::Order {
                    line: i + 3,
                    reason: "packets not in strictly increasing (t, band, frame type, bw) order"
                        .into(),
                });
            }
        }
        Ok(())
    }
}

/// One fixed-duration window of sanitized observations on the canonical grid.
///
/// `values` and `masks` are row-major `rows × grid_size` matrices. A mask bit
/// of `false` means the subcarrier is absent from that observation and its
/// value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SanitizedWindow {
    pub t0_us: i64,
    pub win_us: i64,
    pub grid_size: usize,
    pub values: Vec<f64>,
    pub masks: Vec<bool>,
    /// Within-window time in `[0, 1]`, strictly increasing.
    pub ts: Vec<f64>,
    pub label: u32,
}

impl SanitizedWindow {
    pub fn new(
        t0_us: i64,
        win_us: i64,
        grid_size: usize,
        values: Vec<f64>,
        masks: Vec<bool>,
        ts: Vec<f64>,
        label: u32,
    ) -> Result<Self> {
        let w = SanitizedWindow {
            t0_us,
            win_us,
            grid_size,
            values,
            masks,
            ts,
            label,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let rows = self.ts.len();
        if self.win_us <= 0 || self.grid_size == 0 {
            return Err(CsiError::Window("non-positive window length or grid size".into()));
        }
        if self.values.len() != rows * self.grid_size || self.masks.len() != rows * self.grid_size
        {
            return Err(CsiError::Window(format!(
                "expected {rows}x{} values and masks",
                self.grid_size
            )));
        }
        if self.ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(CsiError::Window("timestamp outside [0, 1]".into()));
        }
        if self.ts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CsiError::Window("timestamps not strictly increasing".into()));
        }
        for q in 0..rows {
            let (v, m) = (self.row(q), self.mask_row(q));
            if !m.iter().any(|&b| b) {
                return Err(CsiError::Window(format!("row {q} has no unmasked entry")));
            }
            if v.iter().zip(m).any(|(x, &b)| !x.is_finite() || (!b && *x != 0.0)) {
                return Err(CsiError::Window(format!(
                    "row {q} has a non-finite value or a nonzero masked value"
                )));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.ts.len()
    }

    pub fn row(&self, q: usize) -> &[f64] {
        &self.values[q * self.grid_size..(q + 1) * self.grid_size]
    }

    pub fn mask_row(&self, q: usize) -> &[bool] {
        &self.masks[q * self.grid_size..(q + 1) * self.grid_size]
    }

    /// The window with its rows reordered by `perm` (rows `perm[0]`,
    /// `perm[1]`, ...). Timestamps travel with their rows, so the result may
    /// violate the ordering invariant; only used to probe order invariance.
    pub fn permuted_rows(&self, perm: &[usize]) -> SanitizedWindow {
        let g = self.grid_size;
        let mut out = self.clone();
        for (dst, &src) in perm.iter().enumerate() {
            out.values[dst * g..(dst + 1) * g].copy_from_slice(self.row(src));
            out.masks[dst * g..(dst + 1) * g].copy_from_slice(self.mask_row(src));
            out.ts[dst] = self.ts[src];
        }
        out
    }
}

/// Timestamp and amplitude quality of a packet sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    /// Missing rate against the 10 ms grid.
    pub mr: f64,
    /// Sampling coefficient of variation; absent with fewer than 3 packets.
    pub scv: Option<f64>,
    /// Amplitude coefficient of variation; only meaningful for static scenes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub acv: Option<f64>,
}
