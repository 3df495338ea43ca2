use std::path::{Path, PathBuf};

use unifi_core::io::save_stream;

use crate::data::Manifest;
use crate::error::{HarnessError, Result, StageExt};
use crate::har::HarSynthConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes one JSON Lines file per generated stream plus `manifest.json`
/// (paths relative to `out_dir`). Returns the manifest path.
pub fn cmd_synth(cfg: &HarSynthConfig, out_dir: &Path) -> Result<PathBuf> {
    let streams = cfg.generate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut manifest = Manifest { streams: Vec::new(), labels: Vec::new() };
    for s in &streams {
        let label = s.label.expect("generated streams are labelled");
        let subject = s.subject_id.as_deref().unwrap_or("s");
        let name = PathBuf::from(format!("class{label}_{subject}.jsonl"));
        save_stream(s, out_dir.join(&name)).stage("write")?;
        manifest.streams.push(name);
        manifest.labels.push(label);
    }
    let path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}
