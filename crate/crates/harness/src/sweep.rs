use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unifi_core::CsiStream;
use unifi_synth::{subsample_to_target, SynthError};

use crate::config::ExperimentConfig;
use crate::data::load_dataset;
use crate::error::{HarnessError, Result, StageExt};
use crate::run::{mean_std, run_on_streams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub target_mr: f64,
    pub target_scv: f64,
    /// Means over the dataset's streams of the realised metrics.
    pub achieved_mr: f64,
    pub achieved_scv: f64,
    pub mean_acc: f64,
    pub std_acc: f64,
}

impl SweepRow {
    fn infeasible(target_mr: f64, target_scv: f64) -> Self {
        SweepRow {
            target_mr,
            target_scv,
            achieved_mr: f64::NAN,
            achieved_scv: f64::NAN,
            mean_acc: f64::NAN,
            std_acc: f64::NAN,
        }
    }
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let streams = load_dataset(cfg)?;
    sweep_on_streams(cfg, &streams)
}

/// Thins every stream to each `(MR, SCV)` cell of the sweep grid and runs the
/// full experiment on the result. Cells the subsampler rejects become NaN
/// rows. Rows are in grid order, MR-major.
pub fn sweep_on_streams(cfg: &ExperimentConfig, base: &[CsiStream]) -> Result<Vec<SweepRow>> {
    let grid = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::config("sweep", "the config has no sweep grid"))?;
    let cells: Vec<(f64, f64)> =
        grid.mr_grid.iter().flat_map(|&mr| grid.scv_grid.iter().map(move |&scv| (mr, scv))).collect();
    cells.par_iter().map(|&(mr, scv)| run_cell(cfg, base, mr, scv)).collect()
}

pub fn run_cell(cfg: &ExperimentConfig, base: &[CsiStream], mr: f64, scv: f64) -> Result<SweepRow> {
    let mut thinned = Vec::with_capacity(base.len());
    let (mut sum_mr, mut sum_scv) = (0.0, 0.0);
    for (i, s) in base.iter().enumerate() {
        match subsample_to_target(s, mr, scv, i as u64) {
            Ok(out) => {
                sum_mr += out.achieved_mr;
                sum_scv += out.achieved_scv;
                thinned.push(out.stream);
            }
            Err(SynthError::Infeasible(_)) => return Ok(SweepRow::infeasible(mr, scv)),
            Err(e) => return Err(e).stage("subsample"),
        }
    }
    let report = run_on_streams(cfg, &thinned)?;
    let (mean_acc, std_acc) = mean_std(&report.accuracies);
    let n = base.len() as f64;
    Ok(SweepRow {
        target_mr: mr,
        target_scv: scv,
        achieved_mr: sum_mr / n,
        achieved_scv: sum_scv / n,
        mean_acc,
        std_acc,
    })
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| HarnessError::Runtime(format!("writing CSV: {e}")))?;
    }
    out.flush().map_err(|e| HarnessError::io("<csv>", e))
}
