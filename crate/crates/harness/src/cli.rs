//! File-level helpers behind the `unifi` subcommands.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use unifi_timeattn::{load_checkpoint, save_checkpoint, train, EpochLog};

use crate::config::ExperimentConfig;
use crate::data::{load_dataset, PreparedDataset};
use crate::error::{HarnessError, Result, StageExt};
use crate::run::{evaluate, model_config, split_data, train_config, Preprocessing};

pub const THREADS_ENV: &str = "UNIFI_THREADS";
pub const CHECKPOINT_FILE: &str = "model.unfi";
pub const PREPROCESSING_FILE: &str = "preprocessing.json";
pub const HISTORY_FILE: &str = "history.json";

/// Sizes the global rayon pool from `UNIFI_THREADS` when it is set.
pub fn init_thread_pool() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::config(THREADS_ENV, format!("expected a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Runtime(format!("thread pool: {e}")))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    crate::config::parse_json(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub test_accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub seed: u64,
    pub n_test: usize,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
}

fn prepared(cfg: &ExperimentConfig) -> Result<PreparedDataset> {
    let streams = load_dataset(cfg)?;
    PreparedDataset::new(&streams, cfg)
}

/// Trains on `seed`'s split and writes the checkpoint, the preprocessing
/// fitted on the training side, the loss history and a summary.
pub fn train_one(cfg: &ExperimentConfig, seed: u64, out_dir: &Path) -> Result<TrainSummary> {
    let start = Instant::now();
    let ds = prepared(cfg)?;
    let data = split_data(&ds, cfg, seed)?;
    let mc = model_config(cfg, &ds);
    let (params, history) = train(&data.train, &[], &mc, &train_config(cfg, seed)).stage("train")?;
    let (test_accuracy, confusion) = evaluate(&data.test, &params)?;
    ensure_dir(out_dir)?;
    save_checkpoint(&out_dir.join(CHECKPOINT_FILE), &params).stage("checkpoint")?;
    write_json(&out_dir.join(PREPROCESSING_FILE), &data.preprocessing)?;
    write_json::<Vec<EpochLog>>(&out_dir.join(HISTORY_FILE), &history)?;
    let mut config = cfg.clone();
    config.model = mc;
    config.train.seeds = vec![seed];
    let summary = TrainSummary {
        config,
        seed,
        n_train: data.train.len(),
        n_test: data.test.len(),
        test_accuracy,
        confusion,
        elapsed_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out_dir.join("train_summary.json"), &summary)?;
    Ok(summary)
}

/// Scores a model written by [`train_one`] on the same seed's test split,
/// preprocessed with the saved training statistics.
pub fn eval_one(cfg: &ExperimentConfig, seed: u64, model_dir: &Path, out_dir: &Path) -> Result<EvalSummary> {
    let params = load_checkpoint(&model_dir.join(CHECKPOINT_FILE)).stage("checkpoint")?;
    let pre: Preprocessing = read_json(&model_dir.join(PREPROCESSING_FILE))?;
    let ds = prepared(cfg)?;
    let (_, te) = ds.split(cfg.train.split, cfg.train.split_mode, seed);
    let (mut test, _) = ds.build(&te, pre.iss.as_ref())?;
    pre.apply(&mut test);
    let (accuracy, confusion) = evaluate(&test, &params)?;
    let out = EvalSummary { seed, n_test: test.len(), accuracy, confusion };
    ensure_dir(out_dir)?;
    write_json(&out_dir.join("eval.json"), &out)?;
    Ok(out)
}
