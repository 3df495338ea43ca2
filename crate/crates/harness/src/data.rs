use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unifi_core::io::load_stream;
use unifi_core::{CsiStream, SanitizedWindow};
use unifi_sanitize::{build_window, prepare, IssSelection, PreparedStream, SanitizedPacket};

use crate::config::{DatasetSpec, ExperimentConfig, SplitMode};
use crate::error::{HarnessError, Result, StageExt};

/// Stream files and their class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub streams: Vec<PathBuf>,
    pub labels: Vec<u32>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let m: Manifest = crate::config::parse_json(&text)?;
        if m.streams.len() != m.labels.len() {
            return Err(HarnessError::config(
                "labels",
                format!("{} labels for {} streams", m.labels.len(), m.streams.len()),
            ));
        }
        Ok(m)
    }
}

/// Loads (or generates) the streams named by the experiment's dataset.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Vec<CsiStream>> {
    let read = |p: &Path| load_stream(p).stage("load");
    let streams = match &cfg.dataset {
        DatasetSpec::Synth(s) => s.generate()?,
        DatasetSpec::Streams(paths) => paths.iter().map(|p| read(p)).collect::<Result<_>>()?,
        DatasetSpec::Manifest(path) => {
            let m = Manifest::load(path)?;
            let dir = path.parent().unwrap_or(Path::new("."));
            let mut out = Vec::with_capacity(m.streams.len());
            for (p, &label) in m.streams.iter().zip(&m.labels) {
                let mut s = read(&dir.join(p))?;
                s.label = Some(label);
                out.push(s);
            }
            out
        }
    };
    Ok(streams)
}

/// A non-empty window of one prepared stream.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRef {
    pub stream: usize,
    pub t0_us: i64,
    pub range: Range<usize>,
    pub label: u32,
    pub subject: String,
}

/// Sanitized streams (stages up to burst filtering) and their windows.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub streams: Vec<PreparedStream>,
    pub windows: Vec<WindowRef>,
    pub win_us: i64,
    pub grid_size: usize,
    pub n_classes: usize,
    /// Raw windows with no packet left after sanitization.
    pub windows_emptied: usize,
}

impl PreparedDataset {
    pub fn new(streams: &[CsiStream], cfg: &ExperimentConfig) -> Result<Self> {
        if streams.is_empty() {
            return Err(HarnessError::config("dataset", "no streams"));
        }
        let (win, stride) = (cfg.window.win_us, cfg.window.stride());
        let mut prepared = Vec::with_capacity(streams.len());
        let mut windows = Vec::new();
        let mut windows_emptied = 0;
        let mut grid_size = None;
        for (i, s) in streams.iter().enumerate() {
            let label = s
                .label
                .ok_or_else(|| HarnessError::config(format!("dataset[{i}]"), "stream has no label"))?;
            let p = match &cfg.clusters {
                Some(keep) => prepare(&s.filtered(|p| keep.contains(&p.key())), &cfg.sanitize),
                None => prepare(s, &cfg.sanitize),
            }
            .stage("sanitize")?;
            if *grid_size.get_or_insert(p.grid.len()) != p.grid.len() {
                return Err(HarnessError::Runtime(format!(
                    "stream {i} has a different canonical grid ({} vs {})",
                    p.grid.len(),
                    grid_size.unwrap_or_default()
                )));
            }
            let subject = s.subject_id.clone().unwrap_or_else(|| format!("stream{i}"));
            for (t0_us, range) in p.window_ranges(win, stride).stage("window")? {
                if range.is_empty() {
                    windows_emptied += 1;
                    continue;
                }
                windows.push(WindowRef { stream: i, t0_us, range, label, subject: subject.clone() });
            }
            prepared.push(p);
        }
        let n_classes = windows.iter().map(|w| w.label as usize + 1).max().unwrap_or(0);
        Ok(PreparedDataset {
            streams: prepared,
            windows,
            win_us: win,
            grid_size: grid_size.unwrap_or(0),
            n_classes,
            windows_emptied,
        })
    }

    pub fn labels(&self) -> Vec<u32> {
        self.windows.iter().map(|w| w.label).collect()
    }

    pub fn packets(&self, i: usize) -> &[SanitizedPacket] {
        let w = &self.windows[i];
        &self.streams[w.stream].packets[w.range.clone()]
    }

    /// Fits subcarrier selection on the given windows.
    pub fn fit_iss(&self, idx: &[usize], k_sel: usize) -> Result<IssSelection> {
        let slices: Vec<&[SanitizedPacket]> = idx.iter().map(|&i| self.packets(i)).collect();
        IssSelection::fit(&slices, &self.streams[0].grids, k_sel).stage("subcarrier selection")
    }

    /// Model-ready windows for `idx`; windows emptied by the selection are
    /// skipped and counted.
    pub fn build(&self, idx: &[usize], iss: Option<&IssSelection>) -> Result<(Vec<SanitizedWindow>, usize)> {
        let mut out = Vec::with_capacity(idx.len());
        let mut dropped = 0;
        for &i in idx {
            let w = &self.windows[i];
            let grid = &self.streams[w.stream].grid;
            match build_window(self.packets(i), w.t0_us, self.win_us, grid, w.label, iss).stage("window")?.0 {
                Some(sw) => out.push(sw),
                None => dropped += 1,
            }
        }
        Ok((out, dropped))
    }

    /// `(train, test)` window indices for one seed.
    pub fn split(&self, frac: f64, mode: SplitMode, seed: u64) -> (Vec<usize>, Vec<usize>) {
        match mode {
            SplitMode::Window => stratified_split(&self.labels(), frac, seed),
            SplitMode::Subject => {
                let subjects: Vec<&str> = self.windows.iter().map(|w| w.subject.as_str()).collect();
                subject_split(&subjects, frac, seed)
            }
        }
    }
}

fn split_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5911_7000)
}

/// Stratified by class: `round((1 − frac) · n)` windows are held out, shared
/// among the classes in proportion to their sizes (largest remainder first,
/// ties to the lower label), each class's share drawn at random. Both
/// halves are returned in ascending index order.
pub fn stratified_split(labels: &[u32], frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let share = 1.0 - frac;
    let want = (share * labels.len() as f64).round() as usize;
    let exact: Vec<f64> = by_class.values().map(|idx| share * idx.len() as f64).collect();
    let mut n_test: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let missing = want.saturating_sub(n_test.iter().sum());
    for &c in order.iter().take(missing) {
        n_test[c] += 1;
    }

    let mut rng = split_rng(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (mut idx, n) in by_class.into_values().zip(n_test) {
        idx.shuffle(&mut rng);
        let n = n.min(idx.len());
        test.extend_from_slice(&idx[..n]);
        train.extend_from_slice(&idx[n..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Whole subjects, in shuffled order, go to the test side until it holds at
/// least `1 − frac` of the windows.
pub fn subject_split(subjects: &[&str], frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut names: Vec<&str> = subjects.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    names.shuffle(&mut split_rng(seed));
    let want = ((1.0 - frac) * subjects.len() as f64).round() as usize;
    let mut held = BTreeSet::new();
    let mut n_test = 0;
    for name in names {
        if n_test >= want {
            break;
        }
        n_test += subjects.iter().filter(|s| **s == name).count();
        held.insert(name);
    }
    (0..subjects.len()).partition(|&i| !held.contains(subjects[i]))
}

/// Per grid position mean and standard deviation of the unmasked entries of
/// a set of windows. Applied to unmasked entries only, so masked ones stay 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(windows: &[SanitizedWindow]) -> Self {
        let g = windows.first().map_or(0, |w| w.grid_size);
        let mut n = vec![0usize; g];
        let mut sum = vec![0.0; g];
        let mut sq = vec![0.0; g];
        for w in windows {
            for (k, (&v, &m)) in w.values.iter().zip(&w.masks).enumerate() {
                if m {
                    let j = k % g;
                    n[j] += 1;
                    sum[j] += v;
                }
            }
        }
        let mean: Vec<f64> = sum.iter().zip(&n).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
        for w in windows {
            for (k, (&v, &m)) in w.values.iter().zip(&w.masks).enumerate() {
                if m {
                    let j = k % g;
                    sq[j] += (v - mean[j]).powi(2);
                }
            }
        }
        let std = sq
            .iter()
            .zip(&n)
            .map(|(s, &c)| {
                let sd = if c > 1 { (s / c as f64).sqrt() } else { 0.0 };
                if sd > 1e-12 { sd } else { 1.0 }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, w: &mut SanitizedWindow) {
        let g = w.grid_size;
        for (k, (v, &m)) in w.values.iter_mut().zip(&w.masks).enumerate() {
            if m {
                *v = (*v - self.mean[k % g]) / self.std[k % g];
            }
        }
    }
}
