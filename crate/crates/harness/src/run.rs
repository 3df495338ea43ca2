use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unifi_core::{CsiStream, SanitizedWindow};
use unifi_sanitize::{IssSelection, SanitizeReport};
use unifi_timeattn::{predict, train, EpochLog, ModelConfig, ModelParams, TrainConfig};

use crate::config::ExperimentConfig;
use crate::data::{load_dataset, PreparedDataset, Standardizer};
use crate::error::{HarnessError, Result, StageExt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub n_train: usize,
    pub n_test: usize,
    pub history: Vec<EpochLog>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSize {
    pub n_params: usize,
    pub n_classifier_params: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub windows: usize,
    pub windows_emptied: usize,
    pub mean_packets: f64,
    pub min_packets: usize,
    pub max_packets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The resolved configuration, model sizes filled in.
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over seeds; 0 for a single seed.
    pub std_accuracy: f64,
    /// Summed over seeds.
    pub confusion: Vec<Vec<usize>>,
    pub model_size: ModelSize,
    pub windows: WindowStats,
    pub per_seed: Vec<SeedResult>,
    pub sanitize: Vec<SanitizeReport>,
    /// Wall-clock duration; the only field that differs between identical runs.
    pub elapsed_s: f64,
}

/// What a trained split needs to evaluate new windows the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub iss: Option<IssSelection>,
    pub standardizer: Option<Standardizer>,
}

impl Preprocessing {
    pub fn apply(&self, windows: &mut [SanitizedWindow]) {
        if let Some(s) = &self.standardizer {
            windows.iter_mut().for_each(|w| s.apply(w));
        }
    }
}

/// Training and test windows of one seed's split, preprocessed with
/// statistics of the training side only.
pub struct SplitData {
    pub train: Vec<SanitizedWindow>,
    pub test: Vec<SanitizedWindow>,
    pub preprocessing: Preprocessing,
}

pub fn split_data(ds: &PreparedDataset, cfg: &ExperimentConfig, seed: u64) -> Result<SplitData> {
    let (tr, te) = ds.split(cfg.train.split, cfg.train.split_mode, seed);
    if tr.is_empty() {
        return Err(HarnessError::Runtime(format!("seed {seed}: the training split is empty")));
    }
    let iss = match cfg.sanitize.k_sel {
        Some(k) => Some(ds.fit_iss(&tr, k)?),
        None => None,
    };
    let (mut train, _) = ds.build(&tr, iss.as_ref())?;
    let (mut test, _) = ds.build(&te, iss.as_ref())?;
    let standardizer = cfg.standardize.then(|| Standardizer::fit(&train));
    let preprocessing = Preprocessing { iss, standardizer };
    preprocessing.apply(&mut train);
    preprocessing.apply(&mut test);
    Ok(SplitData { train, test, preprocessing })
}

pub fn model_config(cfg: &ExperimentConfig, ds: &PreparedDataset) -> ModelConfig {
    ModelConfig { grid_size: ds.grid_size, n_classes: ds.n_classes, ..cfg.model.clone() }
}

pub fn train_config(cfg: &ExperimentConfig, seed: u64) -> TrainConfig {
    TrainConfig { lr: cfg.train.lr, batch: cfg.train.batch, epochs: cfg.train.epochs, seed }
}

/// Trains on one seed's split and scores the held-out windows.
pub fn run_seed(ds: &PreparedDataset, cfg: &ExperimentConfig, seed: u64) -> Result<(SeedResult, ModelParams)> {
    let data = split_data(ds, cfg, seed)?;
    let mc = model_config(cfg, ds);
    let (params, history) = train(&data.train, &[], &mc, &train_config(cfg, seed)).stage("train")?;
    let (accuracy, confusion) = evaluate(&data.test, &params)?;
    let result = SeedResult {
        seed,
        accuracy,
        confusion,
        n_train: data.train.len(),
        n_test: data.test.len(),
        history,
    };
    Ok((result, params))
}

/// Accuracy and `confusion[true][predicted]`.
pub fn evaluate(windows: &[SanitizedWindow], params: &ModelParams) -> Result<(f64, Vec<Vec<usize>>)> {
    let c = params.cfg.n_classes;
    let mut confusion = vec![vec![0; c]; c];
    if windows.is_empty() {
        return Ok((f64::NAN, confusion));
    }
    let refs: Vec<&SanitizedWindow> = windows.iter().collect();
    let pred = predict(&refs, params).stage("eval")?;
    let mut correct = 0;
    for (w, &p) in windows.iter().zip(&pred) {
        let t = w.label as usize;
        if t >= c {
            return Err(HarnessError::Runtime(format!("label {t} outside the model's {c} classes")));
        }
        confusion[t][p] += 1;
        correct += usize::from(t == p);
    }
    Ok((correct as f64 / windows.len() as f64, confusion))
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Loads the dataset and runs every seed.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let streams = load_dataset(cfg)?;
    run_on_streams(cfg, &streams)
}

/// Sanitize, window, then split, train and evaluate once per seed. Seeds
/// run on the current rayon pool; results are in seed-list order.
pub fn run_on_streams(cfg: &ExperimentConfig, streams: &[CsiStream]) -> Result<RunReport> {
    let start = Instant::now();
    cfg.validate()?;
    let ds = PreparedDataset::new(streams, cfg)?;
    run_prepared(cfg, &ds, start)
}

pub fn run_prepared(cfg: &ExperimentConfig, ds: &PreparedDataset, start: Instant) -> Result<RunReport> {
    if ds.windows.is_empty() {
        return Err(HarnessError::Runtime("no windows survived sanitization".into()));
    }
    let mc = model_config(cfg, ds);
    mc.validate().stage("model")?;
    let per_seed: Vec<SeedResult> = cfg
        .train
        .seeds
        .par_iter()
        .map(|&seed| run_seed(ds, cfg, seed).map(|(r, _)| r))
        .collect::<Result<_>>()?;

    let accuracies: Vec<f64> = per_seed.iter().map(|r| r.accuracy).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&accuracies);
    let c = mc.n_classes;
    let mut confusion = vec![vec![0; c]; c];
    for r in &per_seed {
        for (row, add) in confusion.iter_mut().zip(&r.confusion) {
            row.iter_mut().zip(add).for_each(|(a, b)| *a += b);
        }
    }
    let probe = ModelParams::zeros(&mc).stage("model")?;
    let sizes: Vec<usize> = ds.windows.iter().map(|w| w.range.len()).collect();
    let windows = WindowStats {
        windows: sizes.len(),
        windows_emptied: ds.windows_emptied,
        mean_packets: sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
        min_packets: sizes.iter().copied().min().unwrap_or(0),
        max_packets: sizes.iter().copied().max().unwrap_or(0),
    };
    let mut config = cfg.clone();
    config.model = mc;
    Ok(RunReport {
        config,
        seeds: cfg.train.seeds.clone(),
        accuracies,
        mean_accuracy,
        std_accuracy,
        confusion,
        model_size: ModelSize {
            n_params: probe.n_params(),
            n_classifier_params: probe.n_classifier_params(),
        },
        windows,
        per_seed,
        sanitize: ds.streams.iter().map(|s| s.report.clone()).collect(),
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
