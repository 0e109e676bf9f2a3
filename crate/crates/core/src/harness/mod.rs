//! Experiment harness: JSON configs, presets, CSV results and the
//! invariant suite.
//!
//! Sweeps run in parallel but every file is written here, on the calling
//! thread, after the results have been merged in sweep order.

pub mod config;
pub mod presets;
pub mod results;
pub mod validate;

use std::path::{Path, PathBuf};

pub use config::{load_config, save_config, ExperimentConfig};
pub use presets::{ExperimentOutput, Preset};
pub use results::{emit_csv, ResultRow, ResultSet, RunMeta, CSV_HEADER};
pub use validate::{run_invariant_suite, SuiteReport, REQUIRED_INVARIANTS};

use crate::Result;

/// Writes `results.csv`, `results.meta.json` and the extra files of an
/// experiment into `dir`, returning the written paths.
pub fn write_output(cfg: &ExperimentConfig, output: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv = dir.join("results.csv");
    emit_csv(&output.results, &csv)?;
    written.push(csv);
    let mut names = vec!["results.csv".to_string()];
    for (name, contents) in &output.files {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        names.push(name.clone());
        written.push(path);
    }
    let meta = RunMeta {
        experiment: output.results.experiment.clone(),
        fingerprint: cfg.fingerprint(),
        seed: cfg.seed,
        snr_normalization: presets::normalization_label(cfg).to_string(),
        rows: output.results.len(),
        files: names,
        config: serde_json::to_value(cfg).expect("config serializes"),
    };
    let meta_path = dir.join("results.meta.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n")?;
    written.push(meta_path);
    Ok(written)
}

/// Runs a preset by name with optional JSON overrides and writes its files
/// into the configured output directory.
pub fn run_preset(name: &str, overrides: Option<&serde_json::Value>) -> Result<(ExperimentConfig, ExperimentOutput)> {
    let preset = Preset::parse(name)?;
    let cfg = preset.config(overrides)?;
    let output = presets::run_preset_config(preset, &cfg, None)?;
    write_output(&cfg, &output, &cfg.output.directory)?;
    Ok((cfg, output))
}
