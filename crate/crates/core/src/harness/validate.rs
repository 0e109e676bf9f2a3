//! Named invariant suite behind `rrm validate`.
//!
//! [`REQUIRED_INVARIANTS`] is the registry; a name without a matching
//! check fails the suite just like a violated check.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::config::{ChannelBlock, ExperimentConfig};
use super::presets::{run_preset_config, Preset};
use crate::beampattern::{array_factor, find_peaks, response_at, sidelobe_metrics, excitation, to_db, PatternAxes};
use crate::channel::{AngleRange, ChannelConfig, ChannelModel, Path, PathNormalization, PathSet, RicianParams};
use crate::holography::{
    make_weights, record_hologram, reconstruct_field, reindex, rhs_weights, ReconstructionTerms,
    RecordingConfig, Strategy,
};
use crate::link::{
    alpha_split, build_toeplitz, composite_symbol_samples, equivalent_taps, mutual_information,
    outage_probability, Beamformer, LinkChannel, LinkConfig, LinkScenario, OutageConfig, PulseSpec,
    SnrNormalization,
};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::surface::{
    object_field, reference_field, steering_field, Direction, PhaseSign, ReferenceWaveSpec,
    SurfaceGeometry,
};
use crate::{Grid, Result};

pub const REQUIRED_INVARIANTS: &[&str] = &[
    "surface.reference_center_symmetry",
    "surface.steering_conjugacy",
    "surface.steering_unit_modulus",
    "surface.object_field_linearity",
    "surface.carrier_matches_geometry",
    "holography.reindex_involution",
    "holography.reindex_preserves_entries",
    "holography.hologram_nonnegative",
    "holography.noise_free_closed_form",
    "holography.noise_constant_offset",
    "holography.weights_range_and_b",
    "holography.reconstruction_decomposition",
    "holography.rhs_range_and_endpoints",
    "holography.rhs_peak_scale_invariance",
    "beampattern.scale_invariance",
    "beampattern.normalized_max_and_axes",
    "beampattern.pmsr_grows_with_size",
    "beampattern.path_gain_over_median",
    "channel.unit_power_exact",
    "channel.seed_reproducible",
    "channel.delays_and_ranges",
    "channel.reciprocity_shared_paths",
    "link.mi_monotone_in_snr",
    "link.mi_unit_phase_invariance",
    "link.toeplitz_and_identity_precoder",
    "link.nyquist_composite",
    "link.alpha_split_equivalence",
    "link.outage_bounds_and_reproducible",
    "harness.csv_deterministic",
    "harness.fingerprint_rows",
    "harness.config_round_trip",
];

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<InvariantCheck>,
    /// Registered names that no check reported.
    pub missing: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&InvariantCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<42} residual {:.3e} (tol {:.1e}) {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance,
                c.detail
            )?;
        }
        for m in &self.missing {
            writeln!(f, "FAIL {m:<42} no check registered")?;
        }
        Ok(())
    }
}

/// Random surface, reference and path set for property checks.
pub fn random_scenario(
    rng: &mut SimRng,
    sizes: std::ops::RangeInclusive<usize>,
    paths: std::ops::RangeInclusive<usize>,
) -> (SurfaceGeometry, ReferenceWaveSpec, PathSet) {
    let rows = rng.random_range(sizes.clone());
    let cols = rng.random_range(sizes);
    let geom = SurfaceGeometry::half_wavelength(rows, cols, 30e9, 3f64.sqrt()).expect("valid size");
    let sign = if rng.random::<bool>() { PhaseSign::Plus } else { PhaseSign::Minus };
    let reference =
        ReferenceWaveSpec::new(rng.random_range(0.3..2.0), rng.random_range(-3.0..3.0), sign).expect("valid");
    let count = rng.random_range(paths);
    let list = (0..count)
        .map(|_| {
            Path::new(
                Complex64::from_polar(rng.random_range(0.1..1.5), rng.random_range(-3.1..3.1)),
                rng.random_range(0.0..50e-9),
                Direction::from_degrees(rng.random_range(0.0..80.0), rng.random_range(0.0..360.0)).unwrap(),
            )
            .unwrap()
        })
        .collect();
    let paths = PathSet::new(list, PathNormalization::Raw).expect("nonempty");
    (geom, reference, paths)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

struct Suite {
    checks: Vec<InvariantCheck>,
}

impl Suite {
    fn record(&mut self, name: &str, tolerance: f64, f: impl FnOnce() -> Result<(f64, String)>) {
        let (residual, detail, passed) = match f() {
            Ok((r, d)) => (r, d, r <= tolerance && r.is_finite()),
            Err(e) => (f64::INFINITY, format!("error: {e}"), false),
        };
        self.checks.push(InvariantCheck {
            name: name.to_string(),
            residual,
            tolerance,
            passed,
            detail,
        });
    }

    /// Boolean property reported as residual 0 / 1.
    fn flag(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        self.record(name, 0.0, || f().map(|(ok, d)| (if ok { 0.0 } else { 1.0 }, d)));
    }
}

fn scenario_paths() -> PathSet {
    ExperimentConfig::default().channel_config(None).unwrap().realization(0).unwrap()
}

fn unit_scenario_paths() -> PathSet {
    let cfg = ExperimentConfig {
        channel: ChannelBlock::scenario_unit_gains(),
        ..ExperimentConfig::default()
    };
    cfg.channel_config(None).unwrap().realization(0).unwrap()
}

fn geom(n: usize) -> SurfaceGeometry {
    SurfaceGeometry::half_wavelength(n, n, 30e9, 3f64.sqrt()).expect("valid size")
}

/// Runs every registered invariant with randomness keyed by `seed`.
pub fn run_invariant_suite(seed: u64) -> SuiteReport {
    let mut suite = Suite { checks: Vec::new() };
    let mut rng = rng_from_seed(derive_seed(seed, 0x7A11));
    let scenarios: Vec<_> = (0..12).map(|_| random_scenario(&mut rng, 1..=12, 1..=6)).collect();

    // surface
    suite.record("surface.reference_center_symmetry", 0.0, || {
        let mut worst: f64 = 0.0;
        for (g, r, _) in &scenarios {
            let er = reference_field(g, r);
            worst = worst.max(reindex(&er).max_abs_diff(&er));
        }
        Ok((worst, "exact equality".into()))
    });
    suite.record("surface.steering_conjugacy", 1e-12, || {
        let mut worst: f64 = 0.0;
        for (g, _, p) in &scenarios {
            for path in p.iter() {
                let a = steering_field(g, &path.direction);
                worst = worst.max(reindex(&a).max_abs_diff(&a.conj()));
            }
        }
        Ok((worst, String::new()))
    });
    suite.record("surface.steering_unit_modulus", 1e-12, || {
        let mut worst: f64 = 0.0;
        for (g, _, p) in &scenarios {
            for path in p.iter() {
                for z in steering_field(g, &path.direction).iter() {
                    worst = worst.max((z.norm() - 1.0).abs());
                }
            }
        }
        Ok((worst, String::new()))
    });
    suite.record("surface.object_field_linearity", 1e-12, || {
        let c = Complex64::new(-0.7, 1.3);
        let mut worst: f64 = 0.0;
        for (g, _, p) in &scenarios {
            let base = object_field(g, p)?.map(|z| z * c);
            let scaled = object_field(g, &p.map_gains(|x| x * c))?;
            let scale = base.iter().map(|z| z.norm()).fold(1.0, f64::max);
            worst = worst.max(base.max_abs_diff(&scaled) / scale);
        }
        Ok((worst, "relative".into()))
    });
    suite.record("surface.carrier_matches_geometry", 1e-15, || {
        let g = geom(4);
        let omega = 2.0 * std::f64::consts::PI * g.carrier_frequency();
        Ok(((g.angular_frequency() - omega).abs() / omega, String::new()))
    });

    // holography
    suite.flag("holography.reindex_involution", || {
        Ok((
            scenarios.iter().all(|(g, r, _)| {
                let er = reference_field(g, r);
                let w = er.map(|z| z.re + 2.0 * z.im);
                reindex(&reindex(&w)) == w
            }),
            String::new(),
        ))
    });
    suite.flag("holography.reindex_preserves_entries", || {
        let w = Grid::from_fn(5, 7, |m, n| ((m * 31 + n * 17) % 11) as f64);
        let mut a: Vec<f64> = w.iter().copied().collect();
        let mut b: Vec<f64> = reindex(&w).iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        Ok((a == b, String::new()))
    });
    suite.flag("holography.hologram_nonnegative", || {
        let mut ok = true;
        for (i, (g, r, p)) in scenarios.iter().enumerate() {
            let cfg = RecordingConfig::new(1.0, 0.5 + i as f64, 2, 4, derive_seed(seed, i as u64))?;
            ok &= record_hologram(g, r, p, &cfg)?.values.iter().all(|w| *w >= 0.0 && w.is_finite());
        }
        Ok((ok, String::new()))
    });
    suite.record("holography.noise_free_closed_form", 1e-10, || {
        let mut worst: f64 = 0.0;
        for (g, r, p) in &scenarios {
            let holo = record_hologram(g, r, p, &RecordingConfig::noiseless(0.8))?;
            let eo = object_field(g, p)?;
            let er = reference_field(g, r);
            let off = Complex64::from_polar(1.0, r.phase_offset);
            for m in 0..g.rows() {
                for n in 0..g.cols() {
                    // |A_u E_o|^2 + A_r^2 + 2 A_u Re[E_o conj(e^{j phi} E_r)]
                    let o = eo[(m, n)] * 0.8;
                    let e = er[(m, n)] * off;
                    let w = o.norm_sqr() + e.norm_sqr() + 2.0 * (o * e.conj()).re;
                    worst = worst.max((holo.values[(m, n)] - w).abs());
                }
            }
        }
        Ok((worst, String::new()))
    });
    suite.record("holography.noise_constant_offset", 0.05, || {
        let g = geom(4);
        let r = ReferenceWaveSpec::unit(PhaseSign::Minus);
        let p = scenario_paths();
        let sigma2 = 1.3;
        let clean = record_hologram(&g, &r, &p, &RecordingConfig::noiseless(1.0))?;
        let mut acc = 0.0;
        let seeds = 200;
        for s in 0..seeds {
            let cfg = RecordingConfig::new(1.0, sigma2, 5, 8, derive_seed(seed ^ 0xA5, s))?;
            let noisy = record_hologram(&g, &r, &p, &cfg)?;
            acc += noisy.values.iter().zip(clean.values.iter()).map(|(a, b)| a - b).sum::<f64>();
        }
        let offset = acc / (seeds as f64 * g.num_elements() as f64);
        Ok(((offset - sigma2).abs() / sigma2, format!("mean offset {offset:.4} vs sigma^2 {sigma2}")))
    });
    suite.flag("holography.weights_range_and_b", || {
        let mut ok = true;
        for (g, r, p) in &scenarios {
            let holo = record_hologram(g, r, p, &RecordingConfig::noiseless(1.0))?;
            let wp = reindex(&holo.values);
            for (s, b) in [
                (Strategy::None, 0.0),
                (Strategy::Mean, wp.mean_value()),
                (Strategy::Min, wp.min_value()),
            ] {
                let w = make_weights(&holo, s);
                ok &= w.b_used == b;
                ok &= w.values.iter().all(|v| (0.0..=1.0).contains(v));
                ok &= w.degenerate || w.values.max_value() == 1.0;
            }
        }
        Ok((ok, String::new()))
    });
    suite.record("holography.reconstruction_decomposition", 1e-10, || {
        let mut worst: f64 = 0.0;
        for (g, r, p) in &scenarios {
            let aligned = ReferenceWaveSpec {
                phase_offset: 0.0,
                ..*r
            };
            let holo = record_hologram(g, &aligned, p, &RecordingConfig::noiseless(1.0))?;
            let eh = reconstruct_field(g, &aligned, &reindex(&holo.values))?;
            worst = worst.max(eh.max_abs_diff(&ReconstructionTerms::new(g, &aligned, p)?.sum()));
        }
        Ok((worst, String::new()))
    });
    suite.flag("holography.rhs_range_and_endpoints", || {
        let mut ok = true;
        for (g, r, p) in &scenarios {
            let desired: Vec<_> = p.iter().map(|x| (x.direction, x.gain)).collect();
            let w = rhs_weights(g, r, &desired)?;
            ok &= w.values.iter().all(|v| (0.0..=1.0).contains(v));
            let hi = w.values.max_value();
            let lo = w.values.min_value();
            // Re is scaled by its largest magnitude, so one end reaches 0 or 1
            ok &= w.degenerate || (hi - 1.0).abs() < 1e-12 || lo.abs() < 1e-12;
        }
        Ok((ok, String::new()))
    });
    suite.flag("holography.rhs_peak_scale_invariance", || {
        let g = geom(12);
        let r = ReferenceWaveSpec::unit(PhaseSign::Minus);
        let p = scenario_paths();
        let axes = PatternAxes::uniform(2.0)?;
        let desired: Vec<_> = p.iter().map(|x| (x.direction, x.gain)).collect();
        let scaled: Vec<_> = desired.iter().map(|(d, a)| (*d, a * 3.7)).collect();
        let w1 = rhs_weights(&g, &r, &desired)?;
        let w2 = rhs_weights(&g, &r, &scaled)?;
        let p1 = find_peaks(&array_factor(&g, &r, &w1.values, &axes)?, 1, 0.0);
        let p2 = find_peaks(&array_factor(&g, &r, &w2.values, &axes)?, 1, 0.0);
        let (a, b) = (p1.peaks[0], p2.peaks[0]);
        Ok((
            a.direction().angle_to_deg(&b.direction()) < 1e-9,
            format!("peaks ({}, {}) and ({}, {})", a.theta_deg, a.phi_deg, b.theta_deg, b.phi_deg),
        ))
    });

    // beampattern
    suite.record("beampattern.scale_invariance", 1e-12, || {
        let (g, r, p) = &scenarios[0];
        let holo = record_hologram(g, r, p, &RecordingConfig::noiseless(1.0))?;
        let w = make_weights(&holo, Strategy::None);
        let axes = PatternAxes::uniform(5.0)?;
        let a = array_factor(g, r, &w.values, &axes)?;
        let b = array_factor(g, r, &w.scaled(0.37).values, &axes)?;
        let worst = a.linear.iter().zip(b.linear.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        Ok((worst, String::new()))
    });
    suite.flag("beampattern.normalized_max_and_axes", || {
        let (g, r, p) = &scenarios[1];
        let holo = record_hologram(g, r, p, &RecordingConfig::noiseless(1.0))?;
        let pat = array_factor(g, r, &make_weights(&holo, Strategy::Mean).values, &PatternAxes::uniform(3.0)?)?;
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        let max_db = pat.power_db.max_value();
        Ok((
            max_db == 0.0 && increasing(&pat.axes.theta_deg) && increasing(&pat.axes.phi_deg),
            format!("max {max_db} dB"),
        ))
    });
    let unit_paths = unit_scenario_paths();
    let reference = ReferenceWaveSpec::unit(PhaseSign::Minus);
    suite.flag("beampattern.pmsr_grows_with_size", || {
        let axes = PatternAxes::uniform(1.0)?;
        let targets: Vec<Direction> = unit_paths.iter().map(|p| p.direction).collect();
        let mut pmsr = Vec::new();
        for n in [8, 16, 32] {
            let g = geom(n);
            let holo = record_hologram(&g, &reference, &unit_paths, &RecordingConfig::noiseless(1.0))?;
            let pat = array_factor(&g, &reference, &make_weights(&holo, Strategy::Mean).values, &axes)?;
            pmsr.push(-sidelobe_metrics(&pat, &targets, 5.0)?.mean_sidelobe_db);
        }
        Ok((
            pmsr.windows(2).all(|w| w[1] >= w[0]),
            format!("PMSR 8/16/32: {:.2} {:.2} {:.2} dB", pmsr[0], pmsr[1], pmsr[2]),
        ))
    });
    suite.record("beampattern.path_gain_over_median", 0.0, || {
        let g = geom(32);
        let holo = record_hologram(&g, &reference, &unit_paths, &RecordingConfig::noiseless(1.0))?;
        let w = make_weights(&holo, Strategy::Mean);
        let pat = array_factor(&g, &reference, &w.values, &PatternAxes::uniform(1.0)?)?;
        let median = pat.median_db();
        let x = excitation(&g, &reference, &w.values)?;
        let mut least = f64::INFINITY;
        for p in unit_paths.iter() {
            let db = to_db(response_at(&g, &x, &p.direction)?.norm_sqr() / pat.peak_power);
            least = least.min(db - median);
        }
        // residual is the shortfall below the 10 dB margin
        Ok(((10.0 - least).max(0.0), format!("smallest margin {least:.2} dB")))
    });

    // channel
    let rician = ChannelConfig {
        model: ChannelModel::RicianRandom(RicianParams {
            num_paths: 6,
            k_factor_db: 3.0,
            max_delay: 40e-9,
            theta_range: AngleRange::degrees(10.0, 60.0),
            phi_range: AngleRange::degrees(0.0, 360.0),
        }),
        seed: derive_seed(seed, 0xC4),
    };
    suite.record("channel.unit_power_exact", 1e-12, || {
        let mut worst: f64 = 0.0;
        for t in 0..50 {
            worst = worst.max((rician.realization(t)?.total_power() - 1.0).abs());
        }
        Ok((worst, String::new()))
    });
    suite.flag("channel.seed_reproducible", || {
        let mut ok = true;
        for t in 0..20 {
            ok &= rician.realization(t)? == rician.realization(t)?;
        }
        Ok((ok, String::new()))
    });
    suite.flag("channel.delays_and_ranges", || {
        let mut ok = true;
        for t in 0..200 {
            for p in rician.realization(t)?.iter() {
                ok &= p.delay >= 0.0 && p.delay <= 40e-9;
                ok &= (10.0 - 1e-9..=60.0 + 1e-9).contains(&p.direction.theta_deg());
            }
        }
        Ok((ok, String::new()))
    });
    suite.record("channel.reciprocity_shared_paths", 0.0, || {
        // record and evaluate with one realization object, then with a copy
        let g = geom(6);
        let paths = rician.realization(3)?;
        let link = LinkConfig::default();
        let holo = record_hologram(&g, &reference, &paths, &RecordingConfig::noiseless(1.0))?;
        let w = make_weights(&holo, Strategy::Mean);
        let a = equivalent_taps(&g, &reference, &w.values, &paths, &link)?;
        let b = equivalent_taps(&g, &reference, &w.values, &paths.clone(), &link)?;
        let worst = a.alpha_h.iter().zip(&b.alpha_h).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        Ok((worst, String::new()))
    });

    // link
    let random_h = |rng: &mut SimRng, k: usize| {
        DMatrix::from_fn(k, k, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };
    suite.flag("link.mi_monotone_in_snr", || {
        let mut ok = true;
        for _ in 0..5 {
            let h = random_h(&mut rng, 12);
            let mut last = -1.0;
            for i in 0..40 {
                let mi = mutual_information(&h, 10f64.powf((i as f64 - 10.0) / 5.0), SnrNormalization::Absolute)?;
                ok &= mi >= last;
                last = mi;
            }
            ok &= mutual_information(&h, 0.0, SnrNormalization::Absolute)? == 0.0;
        }
        Ok((ok, String::new()))
    });
    suite.record("link.mi_unit_phase_invariance", 1e-12, || {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let h = random_h(&mut rng, 10);
            let u = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let a = mutual_information(&h, 5.0, SnrNormalization::Absolute)?;
            let b = mutual_information(&(&h * u), 5.0, SnrNormalization::Absolute)?;
            worst = worst.max((a - b).abs() / a);
        }
        Ok((worst, String::new()))
    });
    suite.flag("link.toeplitz_and_identity_precoder", || {
        let mut taps = BTreeMap::new();
        for l in -3i64..=5 {
            taps.insert(l, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        }
        let ch = LinkChannel::new(&taps, 16);
        let h = &ch.h;
        let mut ok = true;
        for i in 1..16 {
            for j in 1..16 {
                ok &= h[(i, j)] == h[(i - 1, j - 1)];
            }
        }
        ok &= ch.precoder() == DMatrix::identity(16, 16);
        ok &= *h == build_toeplitz(&taps, 16);
        Ok((ok, String::new()))
    });
    suite.record("link.nyquist_composite", 1e-3, || {
        // lags inside the filter span; at |l| >= span the truncated tails
        // leave a few 1e-3 of ISI (reported by the acceptance suite)
        let mut worst: f64 = 0.0;
        for span in [8, 10, 12, 16] {
            let w = composite_symbol_samples(&PulseSpec {
                span,
                ..PulseSpec::default()
            })?;
            for (l, v) in w.iter().filter(|(l, _)| l.unsigned_abs() < span as u64) {
                let target = if *l == 0 { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Ok((worst, "lags |l| < span".into()))
    });
    suite.record("link.alpha_split_equivalence", 1e-9, || {
        let link = LinkConfig::default();
        let mut worst: f64 = 0.0;
        for (i, (g, r, p)) in scenarios.iter().enumerate() {
            let holo = record_hologram(g, r, p, &RecordingConfig::noiseless(0.9))?;
            let strategy = [Strategy::None, Strategy::Mean, Strategy::Min][i % 3];
            let w = make_weights(&holo, strategy);
            if w.degenerate {
                continue;
            }
            let taps = equivalent_taps(g, r, &w.values, p, &link)?;
            let split = alpha_split(&holo, &w, p, &link)?;
            for (a, b) in taps.alpha_h.iter().zip(split.total()) {
                worst = worst.max(rel(*a, b));
            }
        }
        Ok((worst, "relative".into()))
    });
    suite.flag("link.outage_bounds_and_reproducible", || {
        let scenario = LinkScenario {
            geometry: geom(4),
            reference,
            user_amplitude: 1.0,
            recording_snr_db: Some(10.0),
            recording_symbols: 2,
            recording_samples_per_symbol: 4,
            recording_seed: derive_seed(seed, 0x0A),
            link: LinkConfig {
                block_length: 16,
                normalization: SnrNormalization::Absolute,
                ..LinkConfig::default()
            },
        };
        let cfg = OutageConfig {
            trials: 40,
            threshold_bits: 1.0,
            snr_db: vec![-10.0, 0.0, 10.0],
        };
        let beams = [Beamformer::Recorded(Strategy::Mean), Beamformer::Rhs];
        let a = outage_probability(&scenario, &rician, &beams, &cfg)?;
        let b = outage_probability(&scenario, &rician, &beams, &cfg)?;
        let bounded = a.iter().all(|c| c.points.iter().all(|p| (0.0..=1.0).contains(&p.probability)));
        Ok((bounded && a == b, String::new()))
    });

    // harness
    suite.flag("harness.csv_deterministic", || {
        let cfg = Preset::Fig6BSweep.config(Some(&serde_json::json!({
            "sweep": {"sizes": [4], "include_64": false},
            "link": {"K": 16, "snr_db": [0, 10]},
        })))?;
        let a = run_preset_config(Preset::Fig6BSweep, &cfg, None)?;
        let b = run_preset_config(Preset::Fig6BSweep, &cfg, None)?;
        Ok((a.results.to_csv_string() == b.results.to_csv_string(), String::new()))
    });
    suite.flag("harness.fingerprint_rows", || {
        let cfg = Preset::Fig8SizeSweep.config(Some(&serde_json::json!({
            "sweep": {"sizes": [4]},
            "link": {"K": 8, "snr_db": [0]},
        })))?;
        let out = run_preset_config(Preset::Fig8SizeSweep, &cfg, None)?;
        let fp = cfg.fingerprint();
        Ok((
            !out.results.is_empty() && out.results.rows.iter().all(|r| r.fingerprint == fp),
            String::new(),
        ))
    });
    suite.flag("harness.config_round_trip", || {
        let mut ok = true;
        for p in Preset::ALL {
            let cfg = p.config(None)?;
            ok &= ExperimentConfig::from_json_str(&cfg.to_json_pretty())? == cfg;
        }
        Ok((ok, String::new()))
    });

    let missing = REQUIRED_INVARIANTS
        .iter()
        .filter(|n| !suite.checks.iter().any(|c| c.name == **n))
        .map(|n| n.to_string())
        .collect();
    SuiteReport {
        checks: suite.checks,
        missing,
    }
}
