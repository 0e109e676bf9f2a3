//! Resolvable-path channels shared by the uplink recording and the downlink.
//!
//! Three sources are supported: a fixed path list, a Rician ensemble (one
//! deterministic line-of-sight path plus Rayleigh non-line-of-sight paths)
//! for outage studies, and cluster tables in the CDL layout
//! `normalized_delay,power_db,aod_deg,zod_deg`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed};
use crate::surface::Direction;
use crate::{Error, Result};

/// CDL-D cluster table (line-of-sight specular and Laplacian components
/// merged into the first cluster).
pub const CDL_D_PROFILE: &str = include_str!("../data/cdl_d.profile");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub gain: Complex64,
    /// Propagation delay in seconds.
    pub delay: f64,
    pub direction: Direction,
}

impl Path {
    pub fn new(gain: Complex64, delay: f64, direction: Direction) -> Result<Self> {
        if !(gain.re.is_finite() && gain.im.is_finite()) {
            return Err(Error::NonFinite("path gain"));
        }
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "path delay must be nonnegative, got {delay}"
            )));
        }
        Ok(Self {
            gain,
            delay,
            direction,
        })
    }

    /// `alpha exp(-j omega tau)`: the gain seen at carrier `omega`.
    pub fn composite_gain(&self, omega: f64) -> Complex64 {
        self.gain * Complex64::from_polar(1.0, -omega * self.delay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathNormalization {
    Raw,
    #[default]
    UnitPower,
}

/// An ordered list of resolvable paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    paths: Vec<Path>,
    normalization: PathNormalization,
}

impl PathSet {
    /// Builds the set, rescaling the gains to unit total power when asked.
    pub fn new(mut paths: Vec<Path>, normalization: PathNormalization) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyPaths);
        }
        if normalization == PathNormalization::UnitPower {
            let power: f64 = paths.iter().map(|p| p.gain.norm_sqr()).sum();
            if power <= 0.0 {
                return Err(Error::InvalidParameter(
                    "cannot normalize a path set with zero total power".into(),
                ));
            }
            let scale = power.sqrt().recip();
            for p in &mut paths {
                p.gain *= scale;
            }
        }
        Ok(Self {
            paths,
            normalization,
        })
    }

    /// The empty set, for exercising error paths.
    pub fn empty() -> Self {
        Self {
            paths: Vec::new(),
            normalization: PathNormalization::Raw,
        }
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Path> {
        self.paths.iter()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn normalization(&self) -> PathNormalization {
        self.normalization
    }

    /// `sum |alpha_i|^2`.
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    pub fn max_delay(&self) -> f64 {
        self.paths.iter().map(|p| p.delay).fold(0.0, f64::max)
    }

    /// Same paths with every gain replaced by `f(gain)`; normalization is not
    /// reapplied.
    pub fn map_gains(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self {
            paths: self
                .paths
                .iter()
                .map(|p| Path {
                    gain: f(p.gain),
                    ..*p
                })
                .collect(),
            normalization: self.normalization,
        }
    }
}

/// Closed angle interval in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub lo: f64,
    pub hi: f64,
}

impl AngleRange {
    pub fn degrees(lo: f64, hi: f64) -> Self {
        Self {
            lo: lo.to_radians(),
            hi: hi.to_radians(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.random::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicianParams {
    pub num_paths: usize,
    /// LOS-to-NLOS power ratio in dB; `f64::INFINITY` gives a pure LOS channel.
    pub k_factor_db: f64,
    /// Upper bound of the uniform NLOS delays, seconds.
    pub max_delay: f64,
    pub theta_range: AngleRange,
    pub phi_range: AngleRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    Manual(PathSet),
    RicianRandom(RicianParams),
    CdlProfile { profile: CdlProfile, delay_spread: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub model: ChannelModel,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.model {
            ChannelModel::Manual(paths) if paths.is_empty() => Err(Error::EmptyPaths),
            ChannelModel::Manual(_) => Ok(()),
            ChannelModel::RicianRandom(p) => {
                if p.num_paths == 0 {
                    return Err(Error::InvalidParameter("path count L must be >= 1".into()));
                }
                if !(p.max_delay > 0.0 && p.max_delay.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "max_delay must be positive, got {}",
                        p.max_delay
                    )));
                }
                if p.k_factor_db.is_nan() {
                    return Err(Error::NonFinite("k_factor_db"));
                }
                for (name, r) in [("theta", p.theta_range), ("phi", p.phi_range)] {
                    if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
                        return Err(Error::InvalidParameter(format!("{name} range is invalid")));
                    }
                }
                if p.theta_range.lo < 0.0 || p.theta_range.hi > std::f64::consts::FRAC_PI_2 + 1e-12 {
                    return Err(Error::InvalidParameter(
                        "theta range must lie within [0, 90] degrees".into(),
                    ));
                }
                Ok(())
            }
            ChannelModel::CdlProfile {
                profile,
                delay_spread,
            } => {
                if profile.clusters.is_empty() {
                    return Err(Error::EmptyProfile);
                }
                if !(*delay_spread > 0.0 && delay_spread.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "delay spread must be positive, got {delay_spread}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Realization `index` drawn from the stream keyed by `(seed, index)`.
    pub fn realization(&self, index: u64) -> Result<PathSet> {
        let mut rng = rng_from_seed(derive_seed(self.seed, index));
        sample_paths(self, &mut rng)
    }
}

/// Draws one channel realization.
pub fn sample_paths<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> Result<PathSet> {
    cfg.validate()?;
    match &cfg.model {
        ChannelModel::Manual(paths) => Ok(paths.clone()),
        ChannelModel::RicianRandom(p) => sample_rician(p, rng),
        ChannelModel::CdlProfile {
            profile,
            delay_spread,
        } => {
            let template = profile.to_path_set(*delay_spread)?;
            let rotated = template.map_gains(|g| g * Complex64::from_polar(1.0, TAU * rng.random::<f64>()));
            PathSet::new(rotated.paths, PathNormalization::UnitPower)
        }
    }
}

fn sample_rician<R: Rng + ?Sized>(p: &RicianParams, rng: &mut R) -> Result<PathSet> {
    let nlos_count = p.num_paths - 1;
    let (los_power, nlos_power) = if p.k_factor_db == f64::INFINITY {
        (1.0, 0.0)
    } else {
        let k = 10f64.powf(p.k_factor_db / 10.0);
        (k / (k + 1.0), 1.0 / (k + 1.0))
    };
    let mut paths = Vec::with_capacity(p.num_paths);
    let los_dir = Direction::new(p.theta_range.sample(rng), p.phi_range.sample(rng))?;
    paths.push(Path::new(Complex64::new(los_power.sqrt(), 0.0), 0.0, los_dir)?);
    let per_path = if nlos_count > 0 {
        nlos_power / nlos_count as f64
    } else {
        0.0
    };
    let sigma = (per_path / 2.0).sqrt();
    for _ in 0..nlos_count {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let gain = Complex64::new(re, im) * sigma;
        // (0, max_delay]
        let delay = p.max_delay * (1.0 - rng.random::<f64>());
        let dir = Direction::new(p.theta_range.sample(rng), p.phi_range.sample(rng))?;
        paths.push(Path::new(gain, delay, dir)?);
    }
    PathSet::new(paths, PathNormalization::UnitPower)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdlCluster {
    pub normalized_delay: f64,
    pub power_db: f64,
    pub aod_deg: f64,
    pub zod_deg: f64,
}

/// Per-cluster CDL table; intra-cluster rays are not modeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdlProfile {
    pub clusters: Vec<CdlCluster>,
}

impl CdlProfile {
    /// Parses `normalized_delay,power_db,aod_deg,zod_deg` rows. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut clusters = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::ProfileParse {
                    line,
                    message: format!("expected 4 columns, found {}", fields.len()),
                });
            }
            let mut vals = [0.0; 4];
            for (slot, field) in vals.iter_mut().zip(&fields) {
                *slot = field.parse::<f64>().map_err(|_| Error::ProfileParse {
                    line,
                    message: format!("`{field}` is not a number"),
                })?;
                if !slot.is_finite() {
                    return Err(Error::ProfileParse {
                        line,
                        message: format!("`{field}` is not finite"),
                    });
                }
            }
            if vals[0] < 0.0 {
                return Err(Error::ProfileParse {
                    line,
                    message: "normalized delay must be nonnegative".into(),
                });
            }
            clusters.push(CdlCluster {
                normalized_delay: vals[0],
                power_db: vals[1],
                aod_deg: vals[2],
                zod_deg: vals[3],
            });
        }
        if clusters.is_empty() {
            return Err(Error::EmptyProfile);
        }
        Ok(Self { clusters })
    }

    pub fn cdl_d() -> Self {
        Self::parse(CDL_D_PROFILE).expect("bundled CDL-D profile parses")
    }

    /// Unit-power path set with zero-phase gains `sqrt(10^(P/10))`.
    ///
    /// Zenith angles beyond 90 degrees are folded into the front hemisphere
    /// (`theta = 180 - zod`); the azimuth is the departure azimuth.
    pub fn to_path_set(&self, delay_spread: f64) -> Result<PathSet> {
        let paths = self
            .clusters
            .iter()
            .map(|c| {
                let zod = c.zod_deg.rem_euclid(360.0);
                let zod = if zod > 180.0 { 360.0 - zod } else { zod };
                let theta = if zod > 90.0 { 180.0 - zod } else { zod };
                Path::new(
                    Complex64::new(10f64.powf(c.power_db / 20.0), 0.0),
                    c.normalized_delay * delay_spread,
                    Direction::from_degrees(theta, c.aod_deg)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        PathSet::new(paths, PathNormalization::UnitPower)
    }
}

/// Parses a profile and scales it to `delay_spread` seconds.
pub fn load_cdl_profile(profile_text: &str, delay_spread: f64) -> Result<PathSet> {
    CdlProfile::parse(profile_text)?.to_path_set(delay_spread)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rician(k_db: f64, l: usize, seed: u64) -> ChannelConfig {
        ChannelConfig {
            model: ChannelModel::RicianRandom(RicianParams {
                num_paths: l,
                k_factor_db: k_db,
                max_delay: 40e-9,
                theta_range: AngleRange::degrees(5.0, 60.0),
                phi_range: AngleRange::degrees(0.0, 360.0),
            }),
            seed,
        }
    }

    fn reference_paths() -> PathSet {
        let angles = [(15.0, 100.0), (30.0, 60.0), (40.0, 35.0), (45.0, 45.0), (45.0, 140.0)];
        PathSet::new(
            angles
                .iter()
                .enumerate()
                .map(|(i, &(t, p))| {
                    Path::new(
                        Complex64::new(1.0, 0.0),
                        i as f64 * 1e-9,
                        Direction::from_degrees(t, p).unwrap(),
                    )
                    .unwrap()
                })
                .collect(),
            PathNormalization::Raw,
        )
        .unwrap()
    }

    #[test]
    fn manual_is_passthrough() {
        let paths = reference_paths();
        let cfg = ChannelConfig {
            model: ChannelModel::Manual(paths.clone()),
            seed: 0,
        };
        assert_eq!(cfg.realization(3).unwrap(), paths);
    }

    #[test]
    fn infinite_k_single_path_is_unit_los() {
        let set = rician(f64::INFINITY, 1, 9).realization(0).unwrap();
        assert_eq!(set.len(), 1);
        let p = set.paths()[0];
        assert!((p.gain - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.delay, 0.0);
    }

    #[test]
    fn rician_los_fraction_tracks_k_factor() {
        let cfg = rician(10.0, 5, 42);
        let draws = 100_000;
        let mut los = 0.0;
        let mut total = 0.0;
        for i in 0..draws {
            let set = cfg.realization(i).unwrap();
            los += set.paths()[0].gain.norm_sqr();
            total += set.total_power();
        }
        let frac = los / total;
        assert!(((frac - 10.0 / 11.0) / (10.0 / 11.0)).abs() < 0.01, "LOS fraction {frac}");
    }

    #[test]
    fn rician_respects_ranges_and_normalization() {
        let cfg = rician(3.0, 6, 1);
        for i in 0..200 {
            let set = cfg.realization(i).unwrap();
            assert!((set.total_power() - 1.0).abs() < 1e-12);
            for p in set.iter() {
                assert!(p.delay >= 0.0 && p.delay <= 40e-9);
                assert!(p.direction.theta_deg() >= 5.0 - 1e-9 && p.direction.theta_deg() <= 60.0 + 1e-9);
            }
        }
    }

    #[test]
    fn realizations_reproducible() {
        let cfg = rician(6.0, 4, 77);
        assert_eq!(cfg.realization(11).unwrap(), cfg.realization(11).unwrap());
        assert_ne!(cfg.realization(11).unwrap(), cfg.realization(12).unwrap());
    }

    #[test]
    fn invalid_rician_parameters() {
        let mut cfg = rician(6.0, 0, 0);
        assert!(cfg.validate().is_err());
        cfg = rician(6.0, 3, 0);
        if let ChannelModel::RicianRandom(p) = &mut cfg.model {
            p.max_delay = 0.0;
        }
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_row_profile() {
        let set = load_cdl_profile("0,0,0,0\n", 30e-9).unwrap();
        assert_eq!(set.len(), 1);
        let p = set.paths()[0];
        assert_eq!(p.delay, 0.0);
        assert!((p.gain.norm() - 1.0).abs() < 1e-15);
        assert_eq!(p.direction.theta(), 0.0);
    }

    #[test]
    fn power_ratio_from_db() {
        let set = load_cdl_profile("# two clusters\n0,0,10,20\n1.0,-3,30,40\n", 1e-9).unwrap();
        let ratio = set.paths()[0].gain.norm_sqr() / set.paths()[1].gain.norm_sqr();
        assert!((ratio - 10f64.powf(0.3)).abs() < 1e-12);
        assert!((ratio - 2.0).abs() < 0.01);
    }

    #[test]
    fn parse_errors_name_the_line() {
        match CdlProfile::parse("0,0,0,0\n# ok\n1,2,3\n") {
            Err(Error::ProfileParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match CdlProfile::parse("0,0,x,0\n") {
            Err(Error::ProfileParse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(CdlProfile::parse("# nothing\n\n"), Err(Error::EmptyProfile)));
    }

    #[test]
    fn bundled_cdl_d() {
        let profile = CdlProfile::cdl_d();
        assert_eq!(profile.clusters.len(), 13);
        let ds = 30e-9;
        let set = profile.to_path_set(ds).unwrap();
        assert!((set.total_power() - 1.0).abs() < 1e-12);
        let max_norm = profile
            .clusters
            .iter()
            .map(|c| c.normalized_delay)
            .fold(0.0, f64::max);
        assert_eq!(max_norm, 12.525);
        assert!((set.max_delay() - 12.525 * ds).abs() < 1e-18);
        for p in set.iter() {
            assert!(p.direction.theta_deg() <= 90.0);
        }
    }

    #[test]
    fn cdl_realizations_randomize_phase_only() {
        let cfg = ChannelConfig {
            model: ChannelModel::CdlProfile {
                profile: CdlProfile::cdl_d(),
                delay_spread: 30e-9,
            },
            seed: 5,
        };
        let a = cfg.realization(0).unwrap();
        let b = cfg.realization(1).unwrap();
        for (p, q) in a.iter().zip(b.iter()) {
            assert!((p.gain.norm() - q.gain.norm()).abs() < 1e-12);
            assert_eq!(p.delay, q.delay);
        }
        assert!((a.total_power() - 1.0).abs() < 1e-12);
    }
}
