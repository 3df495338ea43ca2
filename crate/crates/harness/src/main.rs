use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use unifi_core::io::{load_stream, save_windows};
use unifi_harness::config::{parse_json, read_config};
use unifi_harness::error::{HarnessError, Result};
use unifi_harness::{cli, ExperimentConfig, HarSynthConfig};
use unifi_sanitize::{sanitize_pipeline, SanitizeConfig};

#[derive(Parser)]
#[command(name = "unifi", version, about = "Irregular Wi-Fi CSI sensing experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed(s) of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate labelled synthetic streams and a manifest.
    Synth(Common),
    /// Sanitize one stream into model-ready windows.
    Sanitize(SanitizeArgs),
    /// MR/SCV (and ACV) per cluster, per band and merged.
    Metrics {
        /// Stream file (JSON Lines).
        #[arg(long = "in")]
        input: PathBuf,
        /// The capture is of a static scene; also report ACV.
        #[arg(long = "static")]
        static_scene: bool,
        /// Write metrics.json here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Train one model on a seed's training split.
    Train(Common),
    /// Evaluate a model written by `train` on the same seed's test split.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Directory holding `train`'s outputs; defaults to --out-dir.
        #[arg(long)]
        model_dir: Option<PathBuf>,
    },
    /// Full experiment over every configured seed.
    Run(Common),
    /// MR x SCV robustness grid.
    Sweep(Common),
}

#[derive(Args)]
struct SanitizeArgs {
    /// Stream file (JSON Lines).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output window file.
    #[arg(long)]
    out: PathBuf,
    /// Sanitization config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tau_d: Option<f64>,
    #[arg(long)]
    t_b_ms: Option<f64>,
    #[arg(long)]
    t_c_ms: Option<f64>,
    /// Subcarrier budget per wideband grid.
    #[arg(long)]
    iss: Option<usize>,
    #[arg(long)]
    no_burst_filter: bool,
    #[arg(long, default_value_t = 4000.0)]
    win_ms: f64,
    #[arg(long)]
    stride_ms: Option<f64>,
    /// Also write the stage report (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn ms_to_us(ms: f64, flag: &str) -> Result<i64> {
    if ms.is_finite() && ms >= 0.0 {
        Ok((ms * 1000.0).round() as i64)
    } else {
        Err(HarnessError::config(flag, "must be a non-negative number of milliseconds"))
    }
}

fn load_experiment(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.train.seeds = vec![seed];
    }
    Ok(cfg)
}

fn sanitize(a: &SanitizeArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => {
            parse_json::<SanitizeConfig>(&read_config(p)?)?
        }
        None => SanitizeConfig::default(),
    };
    if let Some(v) = a.tau_d {
        cfg.tau_d = v;
    }
    if let Some(v) = a.t_b_ms {
        cfg.t_b_us = ms_to_us(v, "--t-b-ms")?;
    }
    if let Some(v) = a.t_c_ms {
        cfg.t_c_us = ms_to_us(v, "--t-c-ms")?;
    }
    if a.iss.is_some() {
        cfg.k_sel = a.iss;
    }
    if a.no_burst_filter {
        cfg.enable_burst_filter = false;
    }
    cfg.validate().map_err(|e| HarnessError::config("sanitize", e.to_string()))?;
    let win = ms_to_us(a.win_ms, "--win-ms")?;
    let stride = match a.stride_ms {
        Some(s) => ms_to_us(s, "--stride-ms")?,
        None => win,
    };
    if win == 0 || stride == 0 {
        return Err(HarnessError::config("--win-ms", "window and stride must be positive"));
    }
    let stream = load_stream(&a.input).map_err(|e| HarnessError::Stage { stage: "load", source: Box::new(e) })?;
    let (windows, report) = sanitize_pipeline(&stream, &cfg, win, stride)
        .map_err(|e| HarnessError::Stage { stage: "sanitize", source: Box::new(e) })?;
    if let Some(dir) = a.out.parent() {
        cli::ensure_dir(dir)?;
    }
    save_windows(&windows, &a.out).map_err(|e| HarnessError::Stage { stage: "write", source: Box::new(e) })?;
    if let Some(path) = &a.report {
        cli::write_json(path, &report)?;
    }
    eprintln!("{} windows -> {}", windows.len(), a.out.display());
    Ok(())
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Synth(c) => {
            let mut cfg: HarSynthConfig = parse_json(&read_config(&c.config)?)?;
            if let Some(seed) = c.seed {
                cfg.seed = seed;
            }
            let manifest = unifi_harness::synth_cmd::cmd_synth(&cfg, &c.out_dir)?;
            eprintln!("manifest -> {}", manifest.display());
        }
        Cmd::Sanitize(a) => sanitize(&a)?,
        Cmd::Metrics { input, static_scene, out_dir } => {
            let stream = load_stream(&input).map_err(|e| HarnessError::Stage { stage: "load", source: Box::new(e) })?;
            let report = unifi_harness::metrics::cmd_metrics(&stream, static_scene)?;
            match out_dir {
                Some(d) => {
                    cli::ensure_dir(&d)?;
                    cli::write_json(&d.join("metrics.json"), &report)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
            }
        }
        Cmd::Train(c) => {
            let cfg = load_experiment(&c)?;
            let seed = cfg.train.seeds[0];
            let summary = cli::train_one(&cfg, seed, &c.out_dir)?;
            eprintln!("seed {seed}: test accuracy {:.4}", summary.test_accuracy);
        }
        Cmd::Eval { common, model_dir } => {
            let cfg = load_experiment(&common)?;
            let dir = model_dir.unwrap_or_else(|| common.out_dir.clone());
            let seed = cfg.train.seeds[0];
            let out = cli::eval_one(&cfg, seed, &dir, &common.out_dir)?;
            eprintln!("seed {seed}: accuracy {:.4}", out.accuracy);
        }
        Cmd::Run(c) => {
            let cfg = load_experiment(&c)?;
            let report = unifi_harness::cmd_run(&cfg)?;
            cli::ensure_dir(&c.out_dir)?;
            cli::write_json(&c.out_dir.join("report.json"), &report)?;
            eprintln!("accuracy {:.4} +/- {:.4} over {} seeds", report.mean_accuracy, report.std_accuracy, report.seeds.len());
        }
        Cmd::Sweep(c) => {
            let cfg = load_experiment(&c)?;
            let rows = unifi_harness::sweep::cmd_sweep(&cfg)?;
            cli::ensure_dir(&c.out_dir)?;
            let path = c.out_dir.join("sweep.csv");
            let f = std::fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
            unifi_harness::sweep::write_csv(&rows, f)?;
            eprintln!("{} cells -> {}", rows.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = cli::init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
