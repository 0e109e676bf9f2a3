//! JSON experiment configuration.
//!
//! Every block and field is optional; missing values take the defaults
//! of the reference scenario. Unknown keys are rejected. Angles are in
//! degrees and delays in nanoseconds at this boundary; the library works
//! in radians and seconds. See `docs/config.md` for the full schema.

use std::path::{Path as FsPath, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::beampattern::PatternAxes;
use crate::channel::{
    AngleRange, ChannelConfig, ChannelModel, CdlProfile, Path, PathNormalization, PathSet, RicianParams,
};
use crate::holography::{RecordingConfig, Strategy};
use crate::link::{LinkConfig, LinkScenario, OutageConfig, PulseSpec, SnrNormalization};
use crate::rng::derive_seed;
use crate::surface::{Direction, PhaseSign, ReferenceWaveSpec, SurfaceGeometry};
use crate::{Error, Result, SPEED_OF_LIGHT};

pub const SCHEMA_VERSION: u32 = 1;

/// Angles of the reference five-path scenario, `(theta, phi)` in degrees.
pub const SCENARIO_ANGLES_DEG: [(f64, f64); 5] =
    [(15.0, 100.0), (30.0, 60.0), (40.0, 35.0), (45.0, 45.0), (45.0, 140.0)];
const SCENARIO_AMPLITUDES: [f64; 5] = [1.0, 0.6, 0.5, 0.45, 0.35];
const SCENARIO_PHASES_RAD: [f64; 5] = [0.0, 1.1, 2.3, -0.7, 0.4];
const SCENARIO_DELAYS_NS: [f64; 5] = [0.0, 8.0, 17.0, 26.0, 39.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceBlock {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub fc_hz: f64,
    /// Element spacing in metres; half a free-space wavelength when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
    /// `k_sub / k_free`.
    pub substrate_index: f64,
}

impl Default for SurfaceBlock {
    fn default() -> Self {
        Self {
            m: 32,
            n: 32,
            fc_hz: 30e9,
            spacing_m: None,
            substrate_index: 3f64.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceBlock {
    pub amplitude: f64,
    pub phase_offset_deg: f64,
    pub sign: PhaseSign,
}

impl Default for ReferenceBlock {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            phase_offset_deg: 0.0,
            sign: PhaseSign::Minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordingBlock {
    pub user_amplitude: f64,
    /// `null` records without noise.
    pub snr_db: Option<f64>,
    pub duration_symbols: usize,
    pub samples_per_symbol: usize,
}

impl Default for RecordingBlock {
    fn default() -> Self {
        Self {
            user_amplitude: 1.0,
            snr_db: Some(10.0),
            duration_symbols: 5,
            samples_per_symbol: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathEntry {
    pub amplitude: f64,
    #[serde(default)]
    pub phase_deg: f64,
    #[serde(default)]
    pub delay_ns: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelBlock {
    Manual {
        #[serde(default)]
        normalization: PathNormalization,
        paths: Vec<PathEntry>,
    },
    Rician {
        num_paths: usize,
        k_factor_db: f64,
        max_delay_ns: f64,
        theta_range_deg: [f64; 2],
        phi_range_deg: [f64; 2],
    },
    Cdl {
        /// `"cdl_d"` for the bundled table, otherwise a profile file path.
        profile: String,
        delay_spread_ns: f64,
    },
}

impl ChannelBlock {
    /// The reference five-path scenario.
    pub fn scenario() -> Self {
        ChannelBlock::Manual {
            normalization: PathNormalization::UnitPower,
            paths: (0..5)
                .map(|i| PathEntry {
                    amplitude: SCENARIO_AMPLITUDES[i],
                    phase_deg: SCENARIO_PHASES_RAD[i].to_degrees(),
                    delay_ns: SCENARIO_DELAYS_NS[i],
                    theta_deg: SCENARIO_ANGLES_DEG[i].0,
                    phi_deg: SCENARIO_ANGLES_DEG[i].1,
                })
                .collect(),
        }
    }

    /// The five scenario directions with unit, in-phase, undelayed gains.
    pub fn scenario_unit_gains() -> Self {
        ChannelBlock::Manual {
            normalization: PathNormalization::Raw,
            paths: SCENARIO_ANGLES_DEG
                .iter()
                .map(|(t, p)| PathEntry {
                    amplitude: 1.0,
                    phase_deg: 0.0,
                    delay_ns: 0.0,
                    theta_deg: *t,
                    phi_deg: *p,
                })
                .collect(),
        }
    }
}

impl Default for ChannelBlock {
    fn default() -> Self {
        Self::scenario()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsBlock {
    pub strategy: Strategy,
}

impl Default for WeightsBlock {
    fn default() -> Self {
        Self {
            strategy: Strategy::Mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBlock {
    #[serde(rename = "K")]
    pub k: usize,
    pub rolloff: f64,
    pub span: usize,
    pub samples_per_symbol: usize,
    pub symbol_period_ns: f64,
    pub tx_power_w: f64,
    pub snr_db: Vec<f64>,
    pub normalization: SnrNormalization,
}

impl Default for LinkBlock {
    fn default() -> Self {
        let d = LinkConfig::default();
        Self {
            k: d.block_length,
            rolloff: d.pulse.rolloff,
            span: d.pulse.span,
            samples_per_symbol: d.pulse.samples_per_symbol,
            symbol_period_ns: d.symbol_period * 1e9,
            tx_power_w: d.tx_power,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            normalization: d.normalization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutageBlock {
    pub r_th: f64,
    pub trials: usize,
}

impl Default for OutageBlock {
    fn default() -> Self {
        Self {
            r_th: 2.0,
            trials: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatternBlock {
    pub step_deg: f64,
    pub peaks: usize,
    pub min_separation_deg: f64,
    /// Half-angle of the cone excluded around each mainlobe.
    pub guard_deg: f64,
}

impl Default for PatternBlock {
    fn default() -> Self {
        Self {
            step_deg: 0.5,
            peaks: 5,
            min_separation_deg: 5.0,
            guard_deg: 5.0,
        }
    }
}

/// Sweep axes used by the presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub sizes: Vec<usize>,
    /// Appends a 64 x 64 surface to the size sweep.
    pub include_64: bool,
    pub strategies: Vec<Strategy>,
    pub durations_symbols: Vec<usize>,
    pub recording_snr_db: Vec<f64>,
    /// Recording-noise draws averaged per point.
    pub recording_seeds: usize,
    /// Channel draws averaged per point.
    pub realizations: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            sizes: vec![8, 16, 32],
            include_64: false,
            strategies: vec![Strategy::None, Strategy::Mean],
            durations_symbols: vec![1, 5],
            recording_snr_db: vec![0.0, 10.0],
            recording_seeds: 50,
            realizations: 100,
        }
    }
}

impl SweepBlock {
    pub fn effective_sizes(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        if self.include_64 && !s.contains(&64) {
            s.push(64);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub surface: SurfaceBlock,
    pub reference: ReferenceBlock,
    pub recording: RecordingBlock,
    pub channel: ChannelBlock,
    pub weights: WeightsBlock,
    pub link: LinkBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outage: Option<OutageBlock>,
    pub pattern: PatternBlock,
    pub sweep: SweepBlock,
    pub seed: u64,
    pub output: OutputBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            surface: SurfaceBlock::default(),
            reference: ReferenceBlock::default(),
            recording: RecordingBlock::default(),
            channel: ChannelBlock::default(),
            weights: WeightsBlock::default(),
            link: LinkBlock::default(),
            outage: None,
            pattern: PatternBlock::default(),
            sweep: SweepBlock::default(),
            seed: 1,
            output: OutputBlock::default(),
        }
    }
}

fn schema(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn require(cond: bool, key: &str, message: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(schema(key, message))
    }
}

fn finite_positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

/// Recursively overlays `patch` onto `base`; objects merge key by key,
/// everything else is replaced. An object whose `model` tag changes is
/// replaced whole, so switching channel models drops the old fields.
pub fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p))
            if p.get("model").is_some_and(|m| b.get("model") != Some(m)) =>
        {
            *b = p.clone();
        }
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_json(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn classify(err: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = err.path().to_string();
    let inner = err.into_inner();
    if inner.is_syntax() || inner.is_eof() {
        Error::ConfigParse {
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    } else {
        let key = if path == "." { String::new() } else { path };
        Error::Config {
            key,
            message: inner.to_string(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates JSON text.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(classify)?;
        de.end().map_err(|e| Error::ConfigParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates a JSON value (no line information is available).
    pub fn from_value(value: &Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(value.clone()).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                key: if path == "." { String::new() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact canonical JSON serialization, hex-encoded.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.schema_version == SCHEMA_VERSION,
            "schema_version",
            "only schema version 1 is supported",
        )?;
        let s = &self.surface;
        require(s.m >= 1, "surface.M", "must be at least 1")?;
        require(s.n >= 1, "surface.N", "must be at least 1")?;
        require(finite_positive(s.fc_hz), "surface.fc_hz", "must be positive")?;
        if let Some(d) = s.spacing_m {
            require(finite_positive(d), "surface.spacing_m", "must be positive")?;
        }
        require(
            s.substrate_index >= 1.0 && s.substrate_index.is_finite(),
            "surface.substrate_index",
            "must be >= 1",
        )?;
        let r = &self.reference;
        require(
            r.amplitude > 0.0 && r.amplitude.is_finite(),
            "reference.amplitude",
            "must be positive",
        )?;
        require(r.phase_offset_deg.is_finite(), "reference.phase_offset_deg", "must be finite")?;
        let rec = &self.recording;
        require(
            rec.user_amplitude > 0.0 && rec.user_amplitude.is_finite(),
            "recording.user_amplitude",
            "must be positive",
        )?;
        if let Some(snr) = rec.snr_db {
            require(snr.is_finite(), "recording.snr_db", "must be finite or null")?;
        }
        require(rec.duration_symbols >= 1, "recording.duration_symbols", "must be at least 1")?;
        require(rec.samples_per_symbol >= 1, "recording.samples_per_symbol", "must be at least 1")?;
        self.validate_channel()?;
        let l = &self.link;
        require(l.k >= 1, "link.K", "must be at least 1")?;
        require((0.0..=1.0).contains(&l.rolloff), "link.rolloff", "must lie in [0, 1]")?;
        require(l.span >= 4, "link.span", "must be at least 4 symbols")?;
        require(l.samples_per_symbol >= 1, "link.samples_per_symbol", "must be at least 1")?;
        require(finite_positive(l.symbol_period_ns), "link.symbol_period_ns", "must be positive")?;
        require(finite_positive(l.tx_power_w), "link.tx_power_w", "must be positive")?;
        require(!l.snr_db.is_empty(), "link.snr_db", "must list at least one SNR")?;
        require(l.snr_db.iter().all(|x| x.is_finite()), "link.snr_db", "must be finite")?;
        if let Some(o) = &self.outage {
            require(o.r_th >= 0.0 && o.r_th.is_finite(), "outage.r_th", "must be nonnegative")?;
            require(o.trials >= 1, "outage.trials", "must be at least 1")?;
        }
        let p = &self.pattern;
        require(
            p.step_deg > 0.0 && p.step_deg <= 90.0,
            "pattern.step_deg",
            "must lie in (0, 90]",
        )?;
        require(p.min_separation_deg >= 0.0, "pattern.min_separation_deg", "must be nonnegative")?;
        require(p.guard_deg >= 0.0, "pattern.guard_deg", "must be nonnegative")?;
        let sw = &self.sweep;
        require(sw.sizes.iter().all(|s| *s >= 1), "sweep.sizes", "sizes must be at least 1")?;
        require(
            sw.durations_symbols.iter().all(|d| *d >= 1),
            "sweep.durations_symbols",
            "durations must be at least 1",
        )?;
        require(
            sw.recording_snr_db.iter().all(|x| x.is_finite()),
            "sweep.recording_snr_db",
            "must be finite",
        )?;
        require(sw.recording_seeds >= 1, "sweep.recording_seeds", "must be at least 1")?;
        require(sw.realizations >= 1, "sweep.realizations", "must be at least 1")?;
        Ok(())
    }

    fn validate_channel(&self) -> Result<()> {
        match &self.channel {
            ChannelBlock::Manual { paths, .. } => {
                require(!paths.is_empty(), "channel.paths", "must list at least one path")?;
                for (i, p) in paths.iter().enumerate() {
                    let key = |f: &str| format!("channel.paths[{i}].{f}");
                    require(p.amplitude >= 0.0 && p.amplitude.is_finite(), &key("amplitude"), "must be nonnegative")?;
                    require(p.delay_ns >= 0.0 && p.delay_ns.is_finite(), &key("delay_ns"), "must be nonnegative")?;
                    require((0.0..=90.0).contains(&p.theta_deg), &key("theta_deg"), "must lie in [0, 90]")?;
                    require(p.phi_deg.is_finite(), &key("phi_deg"), "must be finite")?;
                    require(p.phase_deg.is_finite(), &key("phase_deg"), "must be finite")?;
                }
                if let ChannelBlock::Manual {
                    normalization: PathNormalization::UnitPower,
                    ..
                } = &self.channel
                {
                    require(
                        paths.iter().any(|p| p.amplitude > 0.0),
                        "channel.paths",
                        "unit-power normalization needs a nonzero gain",
                    )?;
                }
                Ok(())
            }
            ChannelBlock::Rician {
                num_paths,
                k_factor_db,
                max_delay_ns,
                theta_range_deg,
                phi_range_deg,
            } => {
                require(*num_paths >= 1, "channel.num_paths", "must be at least 1")?;
                require(!k_factor_db.is_nan(), "channel.k_factor_db", "must be a number")?;
                require(finite_positive(*max_delay_ns), "channel.max_delay_ns", "must be positive")?;
                require(
                    theta_range_deg[0] >= 0.0 && theta_range_deg[1] <= 90.0 && theta_range_deg[0] <= theta_range_deg[1],
                    "channel.theta_range_deg",
                    "must be an increasing pair within [0, 90]",
                )?;
                require(
                    phi_range_deg.iter().all(|x| x.is_finite()) && phi_range_deg[0] <= phi_range_deg[1],
                    "channel.phi_range_deg",
                    "must be an increasing pair",
                )?;
                Ok(())
            }
            ChannelBlock::Cdl {
                profile,
                delay_spread_ns,
            } => {
                require(!profile.is_empty(), "channel.profile", "must name a profile")?;
                require(finite_positive(*delay_spread_ns), "channel.delay_spread_ns", "must be positive")
            }
        }
    }

    pub fn geometry(&self) -> Result<SurfaceGeometry> {
        self.geometry_sized(self.surface.m, self.surface.n)
    }

    /// Geometry with the configured spacing and carrier but another size.
    pub fn geometry_sized(&self, rows: usize, cols: usize) -> Result<SurfaceGeometry> {
        let s = &self.surface;
        let spacing = s.spacing_m.unwrap_or(SPEED_OF_LIGHT / s.fc_hz / 2.0);
        SurfaceGeometry::new(rows, cols, spacing, spacing, s.fc_hz, s.substrate_index)
    }

    pub fn reference_spec(&self) -> Result<ReferenceWaveSpec> {
        let r = &self.reference;
        ReferenceWaveSpec::new(r.amplitude, r.phase_offset_deg.to_radians(), r.sign)
    }

    pub fn channel_seed(&self) -> u64 {
        derive_seed(self.seed, 0xC4A7)
    }

    pub fn recording_seed(&self) -> u64 {
        derive_seed(self.seed, 0x5EC0)
    }

    /// Channel configuration; CDL profiles other than `cdl_d` are read
    /// from disk relative to `base_dir`.
    pub fn channel_config(&self, base_dir: Option<&FsPath>) -> Result<ChannelConfig> {
        let model = match &self.channel {
            ChannelBlock::Manual { normalization, paths } => {
                let list = paths
                    .iter()
                    .map(|p| {
                        Path::new(
                            Complex64::from_polar(p.amplitude, p.phase_deg.to_radians()),
                            p.delay_ns * 1e-9,
                            Direction::from_degrees(p.theta_deg, p.phi_deg)?,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                ChannelModel::Manual(PathSet::new(list, *normalization)?)
            }
            ChannelBlock::Rician {
                num_paths,
                k_factor_db,
                max_delay_ns,
                theta_range_deg,
                phi_range_deg,
            } => ChannelModel::RicianRandom(RicianParams {
                num_paths: *num_paths,
                k_factor_db: *k_factor_db,
                max_delay: max_delay_ns * 1e-9,
                theta_range: AngleRange::degrees(theta_range_deg[0], theta_range_deg[1]),
                phi_range: AngleRange::degrees(phi_range_deg[0], phi_range_deg[1]),
            }),
            ChannelBlock::Cdl {
                profile,
                delay_spread_ns,
            } => {
                let table = if profile == "cdl_d" {
                    CdlProfile::cdl_d()
                } else {
                    let path = match base_dir {
                        Some(dir) => dir.join(profile),
                        None => PathBuf::from(profile),
                    };
                    CdlProfile::parse(&std::fs::read_to_string(path)?)?
                };
                ChannelModel::CdlProfile {
                    profile: table,
                    delay_spread: delay_spread_ns * 1e-9,
                }
            }
        };
        let cfg = ChannelConfig {
            model,
            seed: self.channel_seed(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn link_config(&self) -> LinkConfig {
        let l = &self.link;
        LinkConfig {
            symbol_period: l.symbol_period_ns * 1e-9,
            pulse: PulseSpec {
                rolloff: l.rolloff,
                span: l.span,
                samples_per_symbol: l.samples_per_symbol,
            },
            block_length: l.k,
            tx_power: l.tx_power_w,
            normalization: l.normalization,
        }
    }

    pub fn scenario(&self, geometry: SurfaceGeometry) -> Result<LinkScenario> {
        Ok(LinkScenario {
            geometry,
            reference: self.reference_spec()?,
            user_amplitude: self.recording.user_amplitude,
            recording_snr_db: self.recording.snr_db,
            recording_symbols: self.recording.duration_symbols,
            recording_samples_per_symbol: self.recording.samples_per_symbol,
            recording_seed: self.recording_seed(),
            link: self.link_config(),
        })
    }

    pub fn recording_config(&self, paths: &PathSet, seed: u64) -> Result<RecordingConfig> {
        self.scenario(self.geometry()?)?.recording_config(paths, seed)
    }

    pub fn outage_config(&self) -> OutageConfig {
        let o = self.outage.clone().unwrap_or_default();
        OutageConfig {
            trials: o.trials,
            threshold_bits: o.r_th,
            snr_db: self.link.snr_db.clone(),
        }
    }

    pub fn pattern_axes(&self) -> Result<PatternAxes> {
        PatternAxes::uniform(self.pattern.step_deg)
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &FsPath) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json_str(&text)
}

/// Writes a config as pretty JSON.
pub fn save_config(cfg: &ExperimentConfig, path: &FsPath) -> Result<()> {
    std::fs::write(path, cfg.to_json_pretty() + "\n")?;
    Ok(())
}
