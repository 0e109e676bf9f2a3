//! Hologram recording, reindexing and holographic weight synthesis.
//!
//! During the uplink every element measures the power of the sum of the
//! user's multipath waves and the local reference wave. Rotating the
//! recorded power matrix by 180 degrees about the feed turns each incident
//! plane wave into its conjugate (the reversed wave) while leaving the
//! centrosymmetric reference untouched, so the reindexed hologram already
//! contains a term that radiates back along every incident path. The
//! remaining terms (a constant, the twin image and path cross products)
//! produce sidelobes; subtracting a constant `b` before normalization
//! suppresses the first of them.
//!
//! [`rhs_weights`] implements the holographic-surface baseline which has the
//! channel state available and computes the useful interference term
//! directly.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Path, PathNormalization, PathSet};
use crate::rng::stream;
use crate::surface::{
    object_field, reference_field, steering_field, ComplexField, Direction, ReferenceWaveSpec,
    SurfaceGeometry,
};
use crate::{Error, Grid, Result};

use rand_distr::{Distribution, StandardNormal};

/// Uplink recording parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordingConfig {
    /// User transmit amplitude `A_u`.
    pub user_amplitude: f64,
    /// Complex noise variance per sample.
    pub noise_power: f64,
    /// Recording duration in symbol periods.
    pub duration_symbols: usize,
    pub samples_per_symbol: usize,
    pub seed: u64,
}

impl RecordingConfig {
    pub fn new(
        user_amplitude: f64,
        noise_power: f64,
        duration_symbols: usize,
        samples_per_symbol: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            user_amplitude,
            noise_power,
            duration_symbols,
            samples_per_symbol,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Noise-free recording of a single sample.
    pub fn noiseless(user_amplitude: f64) -> Self {
        Self {
            user_amplitude,
            noise_power: 0.0,
            duration_symbols: 1,
            samples_per_symbol: 1,
            seed: 0,
        }
    }

    /// Sets the noise power from the recording SNR
    /// `A_u^2 sum |alpha_i|^2 / sigma^2`.
    pub fn with_snr_db(
        user_amplitude: f64,
        snr_db: f64,
        paths: &PathSet,
        duration_symbols: usize,
        samples_per_symbol: usize,
        seed: u64,
    ) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::NonFinite("recording SNR"));
        }
        let signal = user_amplitude * user_amplitude * paths.total_power();
        let noise = signal / 10f64.powf(snr_db / 10.0);
        Self::new(user_amplitude, noise, duration_symbols, samples_per_symbol, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_power < 0.0 {
            return Err(Error::NegativeNoise(self.noise_power));
        }
        if !self.noise_power.is_finite() {
            return Err(Error::NonFinite("noise power"));
        }
        if !(self.user_amplitude >= 0.0 && self.user_amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "user amplitude must be nonnegative, got {}",
                self.user_amplitude
            )));
        }
        if self.duration_symbols == 0 || self.samples_per_symbol == 0 {
            return Err(Error::InvalidParameter(
                "recording needs at least one symbol and one sample per symbol".into(),
            ));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        self.duration_symbols * self.samples_per_symbol
    }

    pub fn snr_db(&self, paths: &PathSet) -> f64 {
        let signal = self.user_amplitude.powi(2) * paths.total_power();
        10.0 * (signal / self.noise_power).log10()
    }
}

/// Recorded interference power at every element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hologram {
    pub values: Grid<f64>,
    pub recording: RecordingConfig,
    pub geometry: SurfaceGeometry,
    pub reference: ReferenceWaveSpec,
}

/// Records the interference power of the user waves and the local reference.
///
/// Simulated at complex baseband: element `(m, n)` averages
/// `|A_u E_o(m, n) + A_r e^{j phi} beta_mn + z_k|^2` over the recording
/// samples, `z_k ~ CN(0, sigma^2)`. Each element draws its noise from its
/// own counter-keyed stream, so the result depends only on the seed.
pub fn record_hologram(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    paths: &PathSet,
    cfg: &RecordingConfig,
) -> Result<Hologram> {
    cfg.validate()?;
    if !(reference.amplitude > 0.0) {
        return Err(Error::InvalidParameter(
            "reference amplitude must be positive for recording".into(),
        ));
    }
    let object = object_field(geom, paths)?;
    let offset = Complex64::from_polar(1.0, reference.phase_offset);
    let er = reference_field(geom, reference);
    let received: Vec<Complex64> = object
        .iter()
        .zip(er.iter())
        .map(|(o, r)| cfg.user_amplitude * o + offset * r)
        .collect();

    let values: Vec<f64> = if cfg.noise_power == 0.0 {
        received.iter().map(|s| s.norm_sqr()).collect()
    } else {
        let sigma = (cfg.noise_power / 2.0).sqrt();
        let samples = cfg.num_samples();
        received
            .par_iter()
            .enumerate()
            .map(|(idx, s)| {
                let mut rng = stream(cfg.seed, idx as u64);
                let mut acc = 0.0;
                for _ in 0..samples {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    acc += (s + Complex64::new(re, im) * sigma).norm_sqr();
                }
                acc / samples as f64
            })
            .collect()
    };

    Ok(Hologram {
        values: Grid::from_vec(geom.rows(), geom.cols(), values)?,
        recording: *cfg,
        geometry: *geom,
        reference: *reference,
    })
}

/// 180-degree rotation: `out(m, n) = in(M - 1 - m, N - 1 - n)`.
pub fn reindex<T: Clone>(matrix: &Grid<T>) -> Grid<T> {
    let (rows, cols) = matrix.shape();
    Grid::from_fn(rows, cols, |m, n| matrix[(rows - 1 - m, cols - 1 - n)].clone())
}

/// Constant subtracted from the reindexed hologram before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `b = 0`.
    None,
    /// `b = mean(W')`, negatives clipped to zero.
    #[default]
    Mean,
    /// `b = min(W')`.
    Min,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Mean => "mean",
            Strategy::Min => "min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    Hologram(Strategy),
    Rhs,
}

/// Real amplitude weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub values: Grid<f64>,
    pub b_used: f64,
    pub rho_used: f64,
    pub source: WeightSource,
    /// Set when every weight came out zero (nothing to normalize).
    pub degenerate: bool,
}

impl WeightMatrix {
    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    /// Weights scaled by `c`, for scale-invariance checks.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.map(|w| w * c),
            rho_used: self.rho_used * c,
            ..self.clone()
        }
    }
}

/// Reindexes the hologram and maps it to `[0, 1]` weights,
/// `W_h = rho * max(W' - b, 0)` with `rho = 1 / max`.
pub fn make_weights(holo: &Hologram, strategy: Strategy) -> WeightMatrix {
    weights_from_reindexed(&reindex(&holo.values), strategy)
}

/// [`make_weights`] applied to an already reindexed matrix `W'`.
pub fn weights_from_reindexed(w_prime: &Grid<f64>, strategy: Strategy) -> WeightMatrix {
    let b = match strategy {
        Strategy::None => 0.0,
        Strategy::Mean => w_prime.mean_value(),
        Strategy::Min => w_prime.min_value(),
    };
    let shifted = w_prime.map(|w| (w - b).max(0.0));
    let peak = shifted.max_value();
    let source = WeightSource::Hologram(strategy);
    if !(peak > 0.0) {
        log::warn!("holographic weights vanish after subtracting b = {b}");
        return WeightMatrix {
            values: shifted.map(|_| 0.0),
            b_used: b,
            rho_used: 1.0,
            source,
            degenerate: true,
        };
    }
    let rho = peak.recip();
    WeightMatrix {
        values: shifted.map(|w| w / peak),
        b_used: b,
        rho_used: rho,
        source,
        degenerate: false,
    }
}

/// Field radiated when the reference wave excites raw weights: `E_r o W'`.
pub fn reconstruct_field(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    weights_raw: &Grid<f64>,
) -> Result<ComplexField> {
    weights_raw.ensure_shape(geom.shape())?;
    let er = reference_field(geom, reference);
    er.zip_map(weights_raw, |e, w| e * *w)
}

/// Four term groups of the reconstructed wave for a noise-free recording
/// with unit user amplitude.
///
/// `reversed` is the wave the reindexed hologram carries in place of the
/// object wave, `sum_p g_p conj(a_p)`; for real path gains it is exactly
/// `conj(E_o)`.
#[derive(Debug, Clone)]
pub struct ReconstructionTerms {
    /// `A_c E_r` with `A_c = A_r^2 + sum_p |g_p|^2`.
    pub constant: ComplexField,
    /// `|E_r|^2 conj(E_o)`: radiates back along the incident paths.
    pub reversed_object: ComplexField,
    /// `sum_{i != j} E_o^i conj(E_o^j) E_r` (reindexed path products).
    pub cross: ComplexField,
    /// `E_o E_r^2`.
    pub twin: ComplexField,
}

impl ReconstructionTerms {
    pub fn new(geom: &SurfaceGeometry, reference: &ReferenceWaveSpec, paths: &PathSet) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyPaths);
        }
        let omega = geom.angular_frequency();
        let er = reference_field(geom, reference);
        // reversed per-path fields g_p conj(a_p), built from the steering
        // vectors directly rather than through `reindex`
        let reversed: Vec<ComplexField> = paths
            .iter()
            .map(|p| {
                let g = p.composite_gain(omega);
                steering_field(geom, &p.direction).map(|a| g * a.conj())
            })
            .collect();
        let a_c = reference.amplitude.powi(2) + paths.iter().map(|p| p.gain.norm_sqr()).sum::<f64>();
        let (rows, cols) = geom.shape();
        let total = Grid::from_fn(rows, cols, |m, n| reversed.iter().map(|f| f[(m, n)]).sum::<Complex64>());

        let constant = er.map(|e| e * a_c);
        let reversed_object = total.zip_map(&er, |o, e| o * e.norm_sqr())?;
        let twin = total.zip_map(&er, |o, e| o.conj() * e * e)?;
        let cross = Grid::from_fn(rows, cols, |m, n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, fi) in reversed.iter().enumerate() {
                for (j, fj) in reversed.iter().enumerate() {
                    if i != j {
                        acc += fi[(m, n)] * fj[(m, n)].conj();
                    }
                }
            }
            acc * er[(m, n)]
        });
        Ok(Self {
            constant,
            reversed_object,
            cross,
            twin,
        })
    }

    pub fn sum(&self) -> ComplexField {
        let (rows, cols) = self.constant.shape();
        Grid::from_fn(rows, cols, |m, n| {
            self.constant[(m, n)] + self.reversed_object[(m, n)] + self.cross[(m, n)] + self.twin[(m, n)]
        })
    }
}

/// Maximum residuals of the reconstruction identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    /// `max |reindex(E_o) - conj(E_o evaluated with conjugated composite gains)|`.
    pub object_conjugacy: f64,
    /// `max |reindex(E_r) - E_r|`.
    pub reference_symmetry: f64,
    /// `max |E_r o W' - (four term groups)|`.
    pub decomposition: f64,
}

impl ReconstructionReport {
    pub fn max_residual(&self) -> f64 {
        self.object_conjugacy
            .max(self.reference_symmetry)
            .max(self.decomposition)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

/// Checks that reindexing conjugates the object wave, preserves the
/// reference wave, and that the reconstructed wave splits into the four
/// term groups of [`ReconstructionTerms`].
pub fn verify_reconstruction(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    paths: &PathSet,
) -> Result<ReconstructionReport> {
    let eo = object_field(geom, paths)?;
    // conjugate the composite gain, delay phase included
    let omega = geom.angular_frequency();
    let conj_paths = PathSet::new(
        paths
            .iter()
            .map(|p| Path {
                gain: p.composite_gain(omega).conj(),
                delay: 0.0,
                direction: p.direction,
            })
            .collect(),
        PathNormalization::Raw,
    )?;
    let eo_conj_gains = object_field(geom, &conj_paths)?;
    let object_conjugacy = reindex(&eo).max_abs_diff(&eo_conj_gains.conj());

    let er = reference_field(geom, reference);
    let reference_symmetry = reindex(&er).max_abs_diff(&er);

    let aligned = ReferenceWaveSpec {
        phase_offset: 0.0,
        ..*reference
    };
    let holo = record_hologram(geom, &aligned, paths, &RecordingConfig::noiseless(1.0))?;
    let eh = reconstruct_field(geom, &aligned, &reindex(&holo.values))?;
    let terms = ReconstructionTerms::new(geom, &aligned, paths)?;
    let decomposition = eh.max_abs_diff(&terms.sum());

    Ok(ReconstructionReport {
        object_conjugacy,
        reference_symmetry,
        decomposition,
    })
}

/// Perfect-CSI holographic surface weights,
/// `M(m, n) = (Re[W_int] / max|Re[W_int]| + 1) / 2`.
///
/// `W_int = sum_p conj(g_p) conj(a_p) conj(E_r)`: each desired wave is the
/// reverse of the wave arriving from that direction, weighted by the
/// conjugate path gain (maximum-ratio superposition).
pub fn rhs_weights(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    desired: &[(Direction, Complex64)],
) -> Result<WeightMatrix> {
    if desired.is_empty() {
        return Err(Error::EmptyPaths);
    }
    let er = reference_field(geom, reference);
    let mut w_int = er.map(|_| Complex64::new(0.0, 0.0));
    for (dir, gain) in desired {
        let a = steering_field(geom, dir);
        let (rows, cols) = geom.shape();
        for m in 0..rows {
            for n in 0..cols {
                w_int[(m, n)] += gain.conj() * a[(m, n)].conj() * er[(m, n)].conj();
            }
        }
    }
    let peak = w_int.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let (rho, degenerate) = if peak > 0.0 { (peak.recip(), false) } else { (1.0, true) };
    Ok(WeightMatrix {
        values: w_int.map(|z| ((z.re * rho + 1.0) / 2.0).clamp(0.0, 1.0)),
        b_used: 0.0,
        rho_used: rho,
        source: WeightSource::Rhs,
        degenerate,
    })
}

/// [`rhs_weights`] aimed at every path of `paths` with its composite gain.
pub fn rhs_weights_for_paths(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    paths: &PathSet,
) -> Result<WeightMatrix> {
    let omega = geom.angular_frequency();
    let desired: Vec<_> = paths
        .iter()
        .map(|p| (p.direction, p.composite_gain(omega)))
        .collect();
    rhs_weights(geom, reference, &desired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Path, PathNormalization};
    use crate::surface::{steering_element, PhaseSign};

    fn geom(rows: usize, cols: usize) -> SurfaceGeometry {
        SurfaceGeometry::half_wavelength(rows, cols, 30e9, 3f64.sqrt()).unwrap()
    }

    fn single(gain: f64, dir: Direction, delay: f64) -> PathSet {
        PathSet::new(
            vec![Path::new(Complex64::new(gain, 0.0), delay, dir).unwrap()],
            PathNormalization::Raw,
        )
        .unwrap()
    }

    #[test]
    fn reindex_small_cases() {
        let one = Grid::from_vec(1, 1, vec![5.0]).unwrap();
        assert_eq!(reindex(&one), one);
        let g = Grid::from_vec(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(reindex(&g), Grid::from_vec(2, 2, vec![4, 3, 2, 1]).unwrap());
        let r = Grid::from_fn(7, 5, |m, n| (m * 13 + n * 7) as f64 * 0.37);
        assert_eq!(reindex(&reindex(&r)), r);
    }

    #[test]
    fn single_path_two_phasor_identity() {
        let g = geom(6, 5);
        let dir = Direction::from_degrees(25.0, 70.0).unwrap();
        let alpha = 0.8;
        let tau = 1.3e-9;
        let paths = single(alpha, dir, tau);
        let reference = ReferenceWaveSpec::unit(PhaseSign::Minus);
        let holo = record_hologram(&g, &reference, &paths, &RecordingConfig::noiseless(1.0)).unwrap();
        let er = reference_field(&g, &reference);
        let omega = g.angular_frequency();
        for m in 0..6 {
            for n in 0..5 {
                let a = steering_element(&g, &dir, m, n).unwrap();
                let phase = a.arg() - omega * tau - er[(m, n)].arg();
                let expected = 1.0 + alpha * alpha + 2.0 * alpha * phase.cos();
                assert!((holo.values[(m, n)] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn silent_user_records_reference_power() {
        let g = geom(4, 4);
        let reference = ReferenceWaveSpec::new(1.5, 0.3, PhaseSign::Plus).unwrap();
        let paths = single(1.0, Direction::from_degrees(20.0, 10.0).unwrap(), 0.0);
        let holo = record_hologram(&g, &reference, &paths, &RecordingConfig::noiseless(0.0)).unwrap();
        assert!(holo.values.iter().all(|w| (w - 2.25).abs() < 1e-12));
    }

    #[test]
    fn recording_rejects_bad_inputs() {
        let g = geom(2, 2);
        let reference = ReferenceWaveSpec::unit(PhaseSign::Minus);
        let paths = single(1.0, Direction::broadside(), 0.0);
        assert!(matches!(
            record_hologram(&g, &reference, &PathSet::empty(), &RecordingConfig::noiseless(1.0)),
            Err(Error::EmptyPaths)
        ));
        let bad = RecordingConfig {
            noise_power: -1.0,
            ..RecordingConfig::noiseless(1.0)
        };
        assert!(matches!(
            record_hologram(&g, &reference, &paths, &bad),
            Err(Error::NegativeNoise(_))
        ));
        let silent_ref = ReferenceWaveSpec::new(0.0, 0.0, PhaseSign::Minus).unwrap();
        assert!(record_hologram(&g, &silent_ref, &paths, &RecordingConfig::noiseless(1.0)).is_err());
    }

    #[test]
    fn noisy_recording_is_seed_reproducible_and_nonnegative() {
        let g = geom(5, 5);
        let reference = ReferenceWaveSpec::unit(PhaseSign::Minus);
        let paths = single(1.0, Direction::from_degrees(30.0, 40.0).unwrap(), 0.0);
        let cfg = RecordingConfig::new(1.0, 2.0, 3, 2, 99).unwrap();
        let a = record_hologram(&g, &reference, &paths, &cfg).unwrap();
        let b = record_hologram(&g, &reference, &paths, &cfg).unwrap();
        assert_eq!(a.values, b.values);
        assert!(a.values.iter().all(|w| *w >= 0.0 && w.is_finite()));
        let c = record_hologram(&g, &reference, &paths, &RecordingConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn constant_hologram_with_mean_is_degenerate() {
        let w = Grid::from_fn(3, 4, |_, _| 2.5);
        let weights = weights_from_reindexed(&w, Strategy::Mean);
        assert!(weights.degenerate);
        assert_eq!(weights.rho_used, 1.0);
        assert!(weights.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn min_strategy_maps_range_to_unit_interval() {
        let w = Grid::from_vec(2, 3, vec![3.0, 5.0, 4.0, 7.0, 3.5, 6.0]).unwrap();
        let weights = weights_from_reindexed(&w, Strategy::Min);
        assert_eq!(weights.b_used, 3.0);
        assert_eq!(weights.values.min_value(), 0.0);
        assert_eq!(weights.values.max_value(), 1.0);
        assert!((weights.rho_used - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mean_strategy_clips_and_records_b() {
        let w = Grid::from_vec(1, 4, vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        let weights = weights_from_reindexed(&w, Strategy::Mean);
        assert_eq!(weights.b_used, 3.0);
        assert_eq!(weights.values.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let none = weights_from_reindexed(&w, Strategy::None);
        assert_eq!(none.b_used, 0.0);
        assert!((none.values[(0, 0)] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn make_weights_reindexes_first() {
        let g = geom(2, 2);
        let holo = Hologram {
            values: Grid::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
            recording: RecordingConfig::noiseless(1.0),
            geometry: g,
            reference: ReferenceWaveSpec::unit(PhaseSign::Minus),
        };
        let w = make_weights(&holo, Strategy::None);
        assert_eq!(w.values.as_slice(), &[1.0, 0.75, 0.5, 0.25]);
    }

    #[test]
    fn unit_weights_reconstruct_reference() {
        let g = geom(4, 3);
        let reference = ReferenceWaveSpec::new(0.9, 0.0, PhaseSign::Plus).unwrap();
        let ones = Grid::from_fn(4, 3, |_, _| 1.0);
        let eh = reconstruct_field(&g, &reference, &ones).unwrap();
        assert!(eh.max_abs_diff(&reference_field(&g, &reference)) < 1e-15);
        let wrong = Grid::from_fn(3, 3, |_, _| 1.0);
        assert!(matches!(
            reconstruct_field(&g, &reference, &wrong),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn single_unit_path_reconstruction_terms() {
        // E_h - A_c E_r - |E_r|^2 conj(E_o) - E_o E_r^2 = 0, computed here
        // without the library's term decomposition
        let g = geom(7, 6);
        let reference = ReferenceWaveSpec::unit(PhaseSign::Plus);
        let paths = single(1.0, Direction::from_degrees(33.0, 125.0).unwrap(), 0.0);
        let holo = record_hologram(&g, &reference, &paths, &RecordingConfig::noiseless(1.0)).unwrap();
        let eh = reconstruct_field(&g, &reference, &reindex(&holo.values)).unwrap();
        let eo = object_field(&g, &paths).unwrap();
        let er = reference_field(&g, &reference);
        let a_c = 1.0 + 1.0;
        for m in 0..7 {
            for n in 0..6 {
                let r = er[(m, n)];
                let o = eo[(m, n)];
                let residual = eh[(m, n)] - a_c * r - r.norm_sqr() * o.conj() - o * r * r;
                assert!(residual.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn reconstruction_trivial_broadside() {
        let g = geom(3, 3);
        let paths = single(1.0, Direction::broadside(), 0.0);
        let report = verify_reconstruction(&g, &ReferenceWaveSpec::unit(PhaseSign::Minus), &paths).unwrap();
        assert!(report.passes(1e-12), "{report:?}");
    }

    #[test]
    fn rhs_endpoints() {
        let g = geom(8, 8);
        let reference = ReferenceWaveSpec::unit(PhaseSign::Minus);
        let dir = Direction::from_degrees(20.0, 45.0).unwrap();
        let w = rhs_weights(&g, &reference, &[(dir, Complex64::new(1.0, 0.0))]).unwrap();
        let er = reference_field(&g, &reference);
        assert!(w.values.iter().all(|v| (0.0..=1.0).contains(v)));
        let re = |m: usize, n: usize| (steering_element(&g, &dir, m, n).unwrap().conj() * er[(m, n)].conj()).re;
        let peak = (0..64).map(|i| re(i / 8, i % 8).abs()).fold(0.0, f64::max);
        for m in 0..8 {
            for n in 0..8 {
                assert!((w.values[(m, n)] - (re(m, n) / peak + 1.0) / 2.0).abs() < 1e-12);
            }
        }
        // element in phase -> 1, antiphase -> 0
        let cosines: Vec<f64> = (0..64)
            .map(|i| {
                let (m, n) = (i / 8, i % 8);
                (steering_element(&g, &dir, m, n).unwrap().conj() * er[(m, n)].conj()).re
            })
            .collect();
        let (imax, _) = cosines
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((w.values.as_slice()[imax] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rhs_broadside_depends_only_on_reference_phase() {
        let g = geom(9, 9);
        let reference = ReferenceWaveSpec::unit(PhaseSign::Minus);
        let w = rhs_weights(&g, &reference, &[(Direction::broadside(), Complex64::new(1.0, 0.0))]).unwrap();
        // elements at equal feed distance share a weight
        for m in 0..9 {
            for n in 0..9 {
                assert!((w.values[(m, n)] - w.values[(n, m)]).abs() < 1e-12);
                assert!((w.values[(m, n)] - w.values[(8 - m, n)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rhs_rejects_empty() {
        let g = geom(2, 2);
        assert!(rhs_weights(&g, &ReferenceWaveSpec::unit(PhaseSign::Minus), &[]).is_err());
    }
}
