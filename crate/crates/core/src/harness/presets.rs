//! Desk-scale reproductions of the reference experiments and the single
//! runs behind the CLI subcommands.
//!
//! Each preset starts from the default config, overlays its own JSON patch
//! and then the user's overrides, so any field can still be changed from a
//! config file.

use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{merge_json, ChannelBlock, ExperimentConfig, SCENARIO_ANGLES_DEG};
use super::results::ResultSet;
use super::validate::run_invariant_suite;
use crate::beampattern::{array_factor, find_peaks, response_at, sidelobe_metrics, excitation};
use crate::channel::PathSet;
use crate::holography::{make_weights, record_hologram, reindex, Strategy};
use crate::link::{db_to_linear, outage_probability, Beamformer, LinkScenario, SnrNormalization};
use crate::numfmt::sig9;
use crate::rng::derive_seed;
use crate::surface::Direction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig5Beampattern,
    Fig6BSweep,
    Fig7Recording,
    Fig8SizeSweep,
    Fig9Cdl,
    Fig10Outage,
    Validate,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig5Beampattern,
        Preset::Fig6BSweep,
        Preset::Fig7Recording,
        Preset::Fig8SizeSweep,
        Preset::Fig9Cdl,
        Preset::Fig10Outage,
        Preset::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig5Beampattern => "fig5_beampattern",
            Preset::Fig6BSweep => "fig6_b_sweep",
            Preset::Fig7Recording => "fig7_recording",
            Preset::Fig8SizeSweep => "fig8_size_sweep",
            Preset::Fig9Cdl => "fig9_cdl",
            Preset::Fig10Outage => "fig10_outage",
            Preset::Validate => "validate",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    /// Preset defaults layered over the global defaults.
    pub fn patch(self) -> Value {
        match self {
            Preset::Fig5Beampattern => json!({
                "surface": {"M": 32, "N": 32},
                "recording": {"snr_db": null},
                "channel": serde_json::to_value(ChannelBlock::scenario_unit_gains()).unwrap(),
            }),
            Preset::Fig6BSweep => json!({
                "recording": {"snr_db": null},
                "link": {"normalization": "normalized", "snr_db": [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20]},
                "sweep": {"sizes": [8, 16, 32], "include_64": true, "strategies": ["none", "mean"]},
            }),
            Preset::Fig7Recording => json!({
                "surface": {"M": 32, "N": 32},
                "link": {"normalization": "absolute"},
                "sweep": {"durations_symbols": [1, 5], "recording_snr_db": [0, 10], "recording_seeds": 50},
            }),
            Preset::Fig8SizeSweep => json!({
                "recording": {"snr_db": 10},
                "link": {"normalization": "absolute"},
                "sweep": {"sizes": [8, 16, 32]},
            }),
            Preset::Fig9Cdl => json!({
                "channel": {"model": "cdl", "profile": "cdl_d", "delay_spread_ns": 30},
                "link": {"normalization": "absolute"},
                "sweep": {"sizes": [8, 16, 32], "realizations": 100},
            }),
            Preset::Fig10Outage => json!({
                "surface": {"M": 8, "N": 8},
                "channel": {
                    "model": "rician",
                    "num_paths": 5,
                    "k_factor_db": 6,
                    "max_delay_ns": 40,
                    "theta_range_deg": [0, 60],
                    "phi_range_deg": [0, 360],
                },
                "link": {"normalization": "absolute", "snr_db": [-10, -7.5, -5, -2.5, 0, 2.5, 5, 7.5, 10]},
                "outage": {"r_th": 2, "trials": 2000},
            }),
            Preset::Validate => json!({}),
        }
    }

    /// Effective config: defaults, then the preset patch, then `overrides`.
    pub fn config(self, overrides: Option<&Value>) -> Result<ExperimentConfig> {
        let mut value = serde_json::to_value(ExperimentConfig::default()).expect("config serializes");
        merge_json(&mut value, &self.patch());
        if let Some(o) = overrides {
            merge_json(&mut value, o);
        }
        ExperimentConfig::from_value(&value)
    }
}

/// Results plus any extra files (name, contents) to write next to them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub results: ResultSet,
    pub files: Vec<(String, String)>,
}

fn size_label(n: usize) -> String {
    format!("{n}x{n}")
}

fn manual_paths(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<PathSet> {
    cfg.channel_config(base_dir)?.realization(0)
}

/// Beam patterns for `strategies` on the configured channel.
fn beampattern_runs(
    cfg: &ExperimentConfig,
    base_dir: Option<&Path>,
    strategies: &[Strategy],
    experiment: &str,
) -> Result<ExperimentOutput> {
    let geom = cfg.geometry()?;
    let reference = cfg.reference_spec()?;
    let paths = manual_paths(cfg, base_dir)?;
    let rec = cfg.recording_config(&paths, cfg.recording_seed())?;
    let holo = record_hologram(&geom, &reference, &paths, &rec)?;
    let axes = cfg.pattern_axes()?;
    let targets: Vec<Direction> = paths.iter().map(|p| p.direction).collect();
    let mut rs = ResultSet::new(experiment, &cfg.fingerprint(), cfg.seed);
    let mut files = Vec::new();
    for (idx, strategy) in strategies.iter().enumerate() {
        let sv = idx as f64;
        let name = strategy.name();
        let weights = make_weights(&holo, *strategy);
        let pattern = array_factor(&geom, &reference, &weights.values, &axes)?;
        let search = find_peaks(&pattern, cfg.pattern.peaks, cfg.pattern.min_separation_deg);
        let mut worst: f64 = 0.0;
        for (k, peak) in search.peaks.iter().enumerate() {
            let err = targets
                .iter()
                .map(|t| t.angle_to_deg(&peak.direction()))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(err);
            rs.push("strategy", sv, &format!("{name}.peak{k}.theta_deg"), peak.theta_deg)?;
            rs.push("strategy", sv, &format!("{name}.peak{k}.phi_deg"), peak.phi_deg)?;
            rs.push("strategy", sv, &format!("{name}.peak{k}.power_db"), peak.power_db)?;
            rs.push("strategy", sv, &format!("{name}.peak{k}.error_deg"), err)?;
        }
        // each configured direction must be claimed by some peak
        let mut recovery: f64 = 0.0;
        for t in &targets {
            let e = search
                .peaks
                .iter()
                .map(|p| t.angle_to_deg(&p.direction()))
                .fold(f64::INFINITY, f64::min);
            recovery = recovery.max(e);
        }
        rs.push("strategy", sv, &format!("{name}.peaks_found"), search.peaks.len() as f64)?;
        if recovery.is_finite() {
            rs.push("strategy", sv, &format!("{name}.max_path_error_deg"), recovery)?;
        }
        let side = sidelobe_metrics(&pattern, &targets, cfg.pattern.guard_deg)?;
        rs.push("strategy", sv, &format!("{name}.mean_sidelobe_db"), side.mean_sidelobe_db)?;
        rs.push("strategy", sv, &format!("{name}.peak_sidelobe_db"), side.peak_sidelobe_db)?;
        rs.push("strategy", sv, &format!("{name}.pmsr_db"), -side.mean_sidelobe_db)?;
        let median = pattern.median_db();
        let x = excitation(&geom, &reference, &weights.values)?;
        for (k, t) in targets.iter().enumerate() {
            let p = response_at(&geom, &x, t)?.norm_sqr() / pattern.peak_power;
            let db = crate::beampattern::to_db(p);
            rs.push("strategy", sv, &format!("{name}.path{k}.over_median_db"), db - median)?;
        }
        let mut buf = Vec::new();
        pattern.write_csv(&mut buf)?;
        files.push((format!("pattern_{name}.csv"), String::from_utf8(buf).expect("UTF-8")));
    }
    Ok(ExperimentOutput { results: rs, files })
}

/// Mean and 95% half-width of a sample.
fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

fn mi_curve(
    scenario: &LinkScenario,
    paths: &PathSet,
    beamformer: Beamformer,
    seed: u64,
    snrs: &[f64],
) -> Result<Vec<f64>> {
    let spec = scenario.spectrum(paths, beamformer, seed)?;
    Ok(snrs.iter().map(|s| spec.mutual_information(db_to_linear(*s))).collect())
}

fn fig6(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    let paths = manual_paths(cfg, base_dir)?;
    let snrs = &cfg.link.snr_db;
    let mut rs = ResultSet::new("fig6_b_sweep", &cfg.fingerprint(), cfg.seed);
    let sizes = cfg.sweep.effective_sizes();
    let jobs: Vec<(usize, Strategy)> = sizes
        .iter()
        .flat_map(|s| cfg.sweep.strategies.iter().map(move |b| (*s, *b)))
        .collect();
    let curves: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|(size, strategy)| {
            let scenario = cfg.scenario(cfg.geometry_sized(*size, *size)?)?;
            mi_curve(&scenario, &paths, Beamformer::Recorded(*strategy), cfg.recording_seed(), snrs)
        })
        .collect::<Result<_>>()?;
    for ((size, strategy), curve) in jobs.iter().zip(&curves) {
        let metric = format!("mi_bits.rrm_{}.{}", strategy.name(), size_label(*size));
        for (snr, mi) in snrs.iter().zip(curve) {
            rs.push("snr_db", *snr, &metric, *mi)?;
        }
    }
    Ok(ExperimentOutput { results: rs, files: Vec::new() })
}

fn fig7(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    let paths = manual_paths(cfg, base_dir)?;
    let snrs = &cfg.link.snr_db;
    let sw = &cfg.sweep;
    let mut rs = ResultSet::new("fig7_recording", &cfg.fingerprint(), cfg.seed);
    let geom = cfg.geometry()?;
    let strategy = cfg.weights.strategy;
    for duration in &sw.durations_symbols {
        for rec_snr in &sw.recording_snr_db {
            let mut c = cfg.clone();
            c.recording.duration_symbols = *duration;
            c.recording.snr_db = Some(*rec_snr);
            let scenario = c.scenario(geom)?;
            let curves: Vec<Vec<f64>> = (0..sw.recording_seeds as u64)
                .into_par_iter()
                .map(|s| {
                    mi_curve(
                        &scenario,
                        &paths,
                        Beamformer::Recorded(strategy),
                        derive_seed(cfg.recording_seed(), s),
                        snrs,
                    )
                })
                .collect::<Result<_>>()?;
            let metric = format!("mi_bits.duration_{duration}.rec_snr_{}", sig9(*rec_snr));
            for (i, snr) in snrs.iter().enumerate() {
                let sample: Vec<f64> = curves.iter().map(|c| c[i]).collect();
                let (m, ci) = mean_ci(&sample);
                rs.push_ci("snr_db", *snr, &metric, m, ci)?;
            }
        }
    }
    Ok(ExperimentOutput { results: rs, files: Vec::new() })
}

fn fig8(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    let paths = manual_paths(cfg, base_dir)?;
    let snrs = &cfg.link.snr_db;
    let mut rs = ResultSet::new("fig8_size_sweep", &cfg.fingerprint(), cfg.seed);
    let beams = [
        ("rrm", Beamformer::Recorded(cfg.weights.strategy)),
        ("rhs", Beamformer::Rhs),
    ];
    let jobs: Vec<(usize, usize)> = cfg
        .sweep
        .effective_sizes()
        .into_iter()
        .flat_map(|s| (0..beams.len()).map(move |b| (s, b)))
        .collect();
    let curves: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|(size, b)| {
            let scenario = cfg.scenario(cfg.geometry_sized(*size, *size)?)?;
            mi_curve(&scenario, &paths, beams[*b].1, cfg.recording_seed(), snrs)
        })
        .collect::<Result<_>>()?;
    for ((size, b), curve) in jobs.iter().zip(&curves) {
        let metric = format!("mi_bits.{}.{}", beams[*b].0, size_label(*size));
        for (snr, mi) in snrs.iter().zip(curve) {
            rs.push("snr_db", *snr, &metric, *mi)?;
        }
    }
    Ok(ExperimentOutput { results: rs, files: Vec::new() })
}

fn fig9(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    let channel = cfg.channel_config(base_dir)?;
    let snrs = &cfg.link.snr_db;
    let mut rs = ResultSet::new("fig9_cdl", &cfg.fingerprint(), cfg.seed);
    let beams = [
        ("rrm", Beamformer::Recorded(cfg.weights.strategy)),
        ("rhs", Beamformer::Rhs),
    ];
    for size in cfg.sweep.effective_sizes() {
        let scenario = cfg.scenario(cfg.geometry_sized(size, size)?)?;
        let per_trial: Vec<Vec<Vec<f64>>> = (0..cfg.sweep.realizations as u64)
            .into_par_iter()
            .map(|t| {
                let paths = channel.realization(t)?;
                let seed = derive_seed(cfg.recording_seed(), t);
                beams
                    .iter()
                    .map(|(_, bf)| mi_curve(&scenario, &paths, *bf, seed, snrs))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (b, (label, _)) in beams.iter().enumerate() {
            let metric = format!("mi_bits.{label}.{}", size_label(size));
            for (i, snr) in snrs.iter().enumerate() {
                let sample: Vec<f64> = per_trial.iter().map(|t| t[b][i]).collect();
                let (m, ci) = mean_ci(&sample);
                rs.push_ci("snr_db", *snr, &metric, m, ci)?;
            }
        }
    }
    Ok(ExperimentOutput { results: rs, files: Vec::new() })
}

fn outage_run(cfg: &ExperimentConfig, base_dir: Option<&Path>, experiment: &str) -> Result<ExperimentOutput> {
    let channel = cfg.channel_config(base_dir)?;
    let scenario = cfg.scenario(cfg.geometry()?)?;
    let beams = [Beamformer::Recorded(cfg.weights.strategy), Beamformer::Rhs];
    let curves = outage_probability(&scenario, &channel, &beams, &cfg.outage_config())?;
    let mut rs = ResultSet::new(experiment, &cfg.fingerprint(), cfg.seed);
    for (curve, label) in curves.iter().zip(["rrm", "rhs"]) {
        for p in &curve.points {
            rs.push_ci("snr_db", p.snr_db, &format!("outage.{label}"), p.probability, p.ci_half_width)?;
        }
    }
    Ok(ExperimentOutput { results: rs, files: Vec::new() })
}

fn validate_run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let report = run_invariant_suite(cfg.seed);
    let mut rs = ResultSet::new("validate", &cfg.fingerprint(), cfg.seed);
    for (i, check) in report.checks.iter().enumerate() {
        // an erroring check reports an infinite residual
        rs.push("invariant", i as f64, &format!("{}.residual", check.name), check.residual.min(f64::MAX))?;
        rs.push("invariant", i as f64, &format!("{}.pass", check.name), f64::from(u8::from(check.passed)))?;
    }
    for name in &report.missing {
        rs.push("invariant", -1.0, &format!("{name}.missing"), 1.0)?;
    }
    Ok(ExperimentOutput {
        results: rs,
        files: vec![("validate_report.txt".to_string(), report.to_string())],
    })
}

/// Runs a preset on an already merged config.
pub fn run_preset_config(preset: Preset, cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    match preset {
        Preset::Fig5Beampattern => {
            beampattern_runs(cfg, base_dir, &[Strategy::None, Strategy::Mean], preset.name())
        }
        Preset::Fig6BSweep => fig6(cfg, base_dir),
        Preset::Fig7Recording => fig7(cfg, base_dir),
        Preset::Fig8SizeSweep => fig8(cfg, base_dir),
        Preset::Fig9Cdl => fig9(cfg, base_dir),
        Preset::Fig10Outage => outage_run(cfg, base_dir, preset.name()),
        Preset::Validate => validate_run(cfg),
    }
}

/// Pattern of the configured strategy (`beampattern` subcommand).
pub fn run_beampattern(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    beampattern_runs(cfg, base_dir, &[cfg.weights.strategy], "beampattern")
}

/// MI over `link.snr_db` for the RRM and RHS weights on realization 0.
pub fn run_mi_sweep(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    let paths = manual_paths(cfg, base_dir)?;
    let scenario = cfg.scenario(cfg.geometry()?)?;
    let mut rs = ResultSet::new("mi_sweep", &cfg.fingerprint(), cfg.seed);
    for (label, bf) in [
        (format!("rrm_{}", cfg.weights.strategy.name()), Beamformer::Recorded(cfg.weights.strategy)),
        ("rhs".to_string(), Beamformer::Rhs),
    ] {
        let curve = mi_curve(&scenario, &paths, bf, cfg.recording_seed(), &cfg.link.snr_db)?;
        for (snr, mi) in cfg.link.snr_db.iter().zip(curve) {
            rs.push("snr_db", *snr, &format!("mi_bits.{label}"), mi)?;
        }
    }
    Ok(ExperimentOutput { results: rs, files: Vec::new() })
}

pub fn run_outage(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    if cfg.outage.is_none() {
        return Err(Error::Config {
            key: "outage".into(),
            message: "the outage subcommand needs an outage block".into(),
        });
    }
    outage_run(cfg, base_dir, "outage")
}

/// Hologram and weight matrices of realization 0 (`record` subcommand).
pub fn run_record(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentOutput> {
    let geom = cfg.geometry()?;
    let reference = cfg.reference_spec()?;
    let paths = manual_paths(cfg, base_dir)?;
    let rec = cfg.recording_config(&paths, cfg.recording_seed())?;
    let holo = record_hologram(&geom, &reference, &paths, &rec)?;
    let weights = make_weights(&holo, cfg.weights.strategy);
    let mut rs = ResultSet::new("record", &cfg.fingerprint(), cfg.seed);
    rs.push("strategy", 0.0, "hologram.min", holo.values.min_value())?;
    rs.push("strategy", 0.0, "hologram.max", holo.values.max_value())?;
    rs.push("strategy", 0.0, "hologram.mean", holo.values.mean_value())?;
    rs.push("strategy", 0.0, "weights.b_used", weights.b_used)?;
    rs.push("strategy", 0.0, "weights.rho_used", weights.rho_used)?;
    rs.push("strategy", 0.0, "weights.degenerate", f64::from(u8::from(weights.degenerate)))?;
    let mut files = Vec::new();
    for (name, grid) in [
        ("hologram.csv", &holo.values),
        ("hologram_reindexed.csv", &reindex(&holo.values)),
        ("weights.csv", &weights.values),
    ] {
        let mut buf = Vec::new();
        grid.write_csv(&mut buf)?;
        files.push((name.to_string(), String::from_utf8(buf).expect("UTF-8")));
    }
    Ok(ExperimentOutput { results: rs, files })
}

/// Normalization note recorded in the run metadata.
pub fn normalization_label(cfg: &ExperimentConfig) -> &'static str {
    match cfg.link.normalization {
        SnrNormalization::Normalized => "normalized: H scaled so that tr(H H^H)/K = 1",
        SnrNormalization::Absolute => "absolute: H unscaled, SNR = P_T / sigma^2",
    }
}

/// Configured scenario directions, used by callers checking peak recovery.
pub fn scenario_directions() -> Vec<Direction> {
    SCENARIO_ANGLES_DEG
        .iter()
        .map(|(t, p)| Direction::from_degrees(*t, *p).expect("valid scenario angle"))
        .collect()
}
