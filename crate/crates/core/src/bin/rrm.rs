use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use rrm_core::harness::config::merge_json;
use rrm_core::harness::presets::{self, Preset};
use rrm_core::harness::{write_output, ExperimentConfig, ExperimentOutput};
use rrm_core::Error;

/// Holographic beamforming simulator for recordable-and-reconfigurable
/// metasurfaces.
#[derive(Parser)]
#[command(name = "rrm", version)]
struct Cli {
    /// JSON config; its fields override the defaults (and preset defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary table and log output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Far-field pattern of the configured weights.
    Beampattern,
    /// Mutual information over the configured SNR list.
    MiSweep,
    /// Monte-Carlo outage probability.
    Outage,
    /// Record a hologram and write it with the derived weights.
    Record,
    /// Run a named experiment preset.
    Preset { name: String },
    /// Run the invariant suite.
    Validate,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn overrides(cli: &Cli) -> Result<Value, Error> {
    let mut value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<Value>(&text).map_err(|e| Error::ConfigParse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?
        }
        None => json!({}),
    };
    if let Some(seed) = cli.seed {
        merge_json(&mut value, &json!({ "seed": seed }));
    }
    if let Some(out) = &cli.out {
        merge_json(&mut value, &json!({ "output": { "directory": out } }));
    }
    Ok(value)
}

fn run(cli: &Cli) -> Result<(ExperimentConfig, ExperimentOutput), Error> {
    let user = overrides(cli)?;
    let base_dir = cli.config.as_ref().and_then(|p| p.parent().map(|d| d.to_path_buf()));
    let base_dir = base_dir.as_deref();
    let (cfg, out) = match &cli.command {
        Command::Preset { name } => {
            let preset = Preset::parse(name)?;
            let cfg = preset.config(Some(&user))?;
            let out = presets::run_preset_config(preset, &cfg, base_dir)?;
            (cfg, out)
        }
        Command::Validate => {
            let cfg = Preset::Validate.config(Some(&user))?;
            let out = presets::run_preset_config(Preset::Validate, &cfg, base_dir)?;
            (cfg, out)
        }
        cmd => {
            let mut value = serde_json::to_value(ExperimentConfig::default()).expect("config serializes");
            merge_json(&mut value, &user);
            let cfg = ExperimentConfig::from_value(&value)?;
            let out = match cmd {
                Command::Beampattern => presets::run_beampattern(&cfg, base_dir)?,
                Command::MiSweep => presets::run_mi_sweep(&cfg, base_dir)?,
                Command::Outage => presets::run_outage(&cfg, base_dir)?,
                Command::Record => presets::run_record(&cfg, base_dir)?,
                Command::Preset { .. } | Command::Validate => unreachable!(),
            };
            (cfg, out)
        }
    };
    write_output(&cfg, &out, &cfg.output.directory)?;
    Ok((cfg, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !cli.quiet {
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    }
    match run(&cli) {
        Ok((cfg, out)) => {
            if !cli.quiet {
                print!("{}", out.results.summary_table());
                println!("wrote {} rows to {}", out.results.len(), cfg.output.directory.display());
            }
            let validation_failed = out
                .results
                .rows
                .iter()
                .any(|r| (r.metric.ends_with(".pass") && r.value == 0.0) || r.metric.ends_with(".missing"));
            if validation_failed {
                if let Some((_, report)) = out.files.iter().find(|(n, _)| n == "validate_report.txt") {
                    eprint!("{report}");
                }
                eprintln!("rrm: invariant suite failed");
                return ExitCode::from(EXIT_VALIDATION);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("rrm: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
