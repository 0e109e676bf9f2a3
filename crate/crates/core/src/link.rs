//! Downlink evaluation: pulse shaping, equivalent discrete-time taps,
//! Toeplitz block channel, mutual information and outage probability.
//!
//! The surface excitation is `x = c W o E_r` with `c` chosen so the
//! radiated power `sum |x|^2` equals the transmit power. Path `i` carries
//! `alpha_h^i = sum x(m, n) p^i(m, n)`, `p^i = q_i a_i`, to the user, and
//! with raised-cosine end-to-end pulses the symbol-spaced channel is
//! `h[l] = sum_i alpha_h^i w(l - tau_i / T_s)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, PathSet};
use crate::holography::{
    make_weights, record_hologram, reindex, rhs_weights_for_paths, Hologram, RecordingConfig, Strategy,
    WeightMatrix,
};
use crate::rng::derive_seed;
use crate::surface::{reference_field, steering_field, ComplexField, ReferenceWaveSpec, SurfaceGeometry};
use crate::{Error, Grid, Result};

/// Taps whose pulse value falls below this are dropped.
pub const TAP_THRESHOLD: f64 = 1e-6;

/// Root-raised-cosine pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub rolloff: f64,
    /// Half-length in symbols.
    pub span: usize,
    pub samples_per_symbol: usize,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            rolloff: 0.25,
            span: 10,
            samples_per_symbol: 8,
        }
    }
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) || self.rolloff.is_nan() {
            return Err(Error::InvalidRolloff(self.rolloff));
        }
        if self.span < 4 {
            return Err(Error::InvalidParameter(format!(
                "pulse span must be at least 4 symbols, got {}",
                self.span
            )));
        }
        if self.samples_per_symbol == 0 {
            return Err(Error::InvalidParameter("samples per symbol must be positive".into()));
        }
        Ok(())
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn rrc_value(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Unit-energy root-raised-cosine samples over `[-span, span]` symbols,
/// `2 span sps + 1` taps.
pub fn rrc_impulse(spec: &PulseSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let sps = spec.samples_per_symbol as f64;
    let half = (spec.span * spec.samples_per_symbol) as i64;
    let mut q: Vec<f64> = (-half..=half).map(|i| rrc_value(i as f64 / sps, spec.rolloff)).collect();
    let energy: f64 = q.iter().map(|v| v * v).sum();
    let scale = energy.sqrt().recip();
    q.iter_mut().for_each(|v| *v *= scale);
    Ok(q)
}

/// Raised-cosine pulse at `t` symbol periods.
pub fn raised_cosine(t: f64, rolloff: f64) -> f64 {
    let base = sinc(t);
    if rolloff == 0.0 {
        return base;
    }
    let edge = 1.0 / (2.0 * rolloff);
    if (t.abs() - edge).abs() < 1e-10 {
        return PI / 4.0 * sinc(edge);
    }
    base * (PI * rolloff * t).cos() / (1.0 - (2.0 * rolloff * t).powi(2))
}

/// Discrete self-convolution `q * q` of the RRC pulse (matched filtering),
/// `4 span sps + 1` samples centred on index `2 span sps`.
pub fn composite(spec: &PulseSpec) -> Result<Vec<f64>> {
    let q = rrc_impulse(spec)?;
    let n = q.len();
    let mut out = vec![0.0; 2 * n - 1];
    for (i, a) in q.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Ok(out)
}

/// Symbol-rate downsampling of [`composite`] around its centre.
pub fn composite_symbol_samples(spec: &PulseSpec) -> Result<BTreeMap<i64, f64>> {
    let c = composite(spec)?;
    let centre = (2 * spec.span * spec.samples_per_symbol) as i64;
    let sps = spec.samples_per_symbol as i64;
    let reach = 2 * spec.span as i64;
    Ok((-reach..=reach)
        .map(|l| (l, c[(centre + l * sps) as usize]))
        .collect())
}

/// How the block channel is scaled before evaluating mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrNormalization {
    /// `H` scaled so `tr(H H^H) / K = 1`; the SNR is the per-symbol receive SNR.
    #[default]
    Normalized,
    /// `H` as built; the SNR is `P_T / sigma^2` and array gain is kept.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    /// Symbol period `T_s`, seconds.
    pub symbol_period: f64,
    pub pulse: PulseSpec,
    /// Block length `K`.
    pub block_length: usize,
    /// Radiated power `P_T`, watts.
    pub tx_power: f64,
    pub normalization: SnrNormalization,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            symbol_period: 10e-9,
            pulse: PulseSpec::default(),
            block_length: 64,
            tx_power: 1.0,
            normalization: SnrNormalization::Normalized,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        if !(self.symbol_period > 0.0 && self.symbol_period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "symbol period must be positive, got {}",
                self.symbol_period
            )));
        }
        if self.block_length == 0 {
            return Err(Error::InvalidParameter("block length K must be >= 1".into()));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "transmit power must be positive, got {}",
                self.tx_power
            )));
        }
        Ok(())
    }
}

/// Downlink path responses `p^i = q_i a_i`.
pub fn path_responses(geom: &SurfaceGeometry, paths: &PathSet) -> Vec<ComplexField> {
    let omega = geom.angular_frequency();
    paths
        .iter()
        .map(|p| {
            let q = p.composite_gain(omega);
            steering_field(geom, &p.direction).map(|a| q * a)
        })
        .collect()
}

/// Power-normalized excitation and its scale `c`.
pub fn scaled_excitation(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    weights: &Grid<f64>,
    tx_power: f64,
) -> Result<(ComplexField, f64)> {
    weights.ensure_shape(geom.shape())?;
    let raw = reference_field(geom, reference).zip_map(weights, |e, w| e * *w)?;
    let power: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    if !(power > 0.0) {
        return Err(Error::AllZeroWeights);
    }
    let c = (tx_power / power).sqrt();
    Ok((raw.map(|z| z * c), c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalentTaps {
    /// `h[l]` at integer lags (may be negative).
    pub taps: BTreeMap<i64, Complex64>,
    /// Per-path downlink gains `alpha_h^i`.
    pub alpha_h: Vec<Complex64>,
    /// Excitation scale `c`.
    pub scale: f64,
}

impl EquivalentTaps {
    pub fn energy(&self) -> f64 {
        self.taps.values().map(|z| z.norm_sqr()).sum()
    }
}

/// Symbol-spaced taps from per-path gains and delays.
pub fn taps_from_gains(
    alpha_h: &[Complex64],
    delays: &[f64],
    link: &LinkConfig,
) -> Result<BTreeMap<i64, Complex64>> {
    link.validate()?;
    if alpha_h.len() != delays.len() {
        return Err(Error::ShapeMismatch {
            expected: (alpha_h.len(), 1),
            found: (delays.len(), 1),
        });
    }
    let span = link.pulse.span as i64;
    let beta = link.pulse.rolloff;
    let mut taps = BTreeMap::new();
    if alpha_h.is_empty() {
        return Ok(taps);
    }
    let rel: Vec<f64> = delays.iter().map(|d| d / link.symbol_period).collect();
    let lo = rel.iter().cloned().fold(f64::INFINITY, f64::min).floor() as i64 - span;
    let hi = rel.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil() as i64 + span;
    for l in lo..=hi {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, r) in alpha_h.iter().zip(&rel) {
            let t = l as f64 - r;
            if t.abs() > span as f64 {
                continue;
            }
            let w = raised_cosine(t, beta);
            if w.abs() >= TAP_THRESHOLD {
                acc += a * w;
            }
        }
        taps.insert(l, acc);
    }
    Ok(taps)
}

/// Equivalent taps of a weighted surface over `paths`.
pub fn equivalent_taps(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    weights: &Grid<f64>,
    paths: &PathSet,
    link: &LinkConfig,
) -> Result<EquivalentTaps> {
    link.validate()?;
    if paths.is_empty() {
        return Err(Error::EmptyPaths);
    }
    let (x, scale) = scaled_excitation(geom, reference, weights, link.tx_power)?;
    let alpha_h: Vec<Complex64> = path_responses(geom, paths)
        .iter()
        .map(|p| x.iter().zip(p.iter()).map(|(a, b)| a * b).sum())
        .collect();
    let delays: Vec<f64> = paths.iter().map(|p| p.delay).collect();
    let taps = taps_from_gains(&alpha_h, &delays, link)?;
    Ok(EquivalentTaps { taps, alpha_h, scale })
}

/// Decomposition of `alpha_h^i` for a noise-free recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSplit {
    /// `c rho M N A_u A_r^2 e^{-j phi} q_i^2`.
    pub main: Vec<Complex64>,
    pub constant: Vec<Complex64>,
    pub other_path: Vec<Complex64>,
    pub conjugate: Vec<Complex64>,
    pub user_cross: Vec<Complex64>,
    /// Contribution of the clipping `max(W' - b, 0)`.
    pub clip: Vec<Complex64>,
}

impl AlphaSplit {
    pub fn residual(&self) -> Vec<Complex64> {
        (0..self.main.len())
            .map(|i| self.constant[i] + self.other_path[i] + self.conjugate[i] + self.user_cross[i] + self.clip[i])
            .collect()
    }

    pub fn total(&self) -> Vec<Complex64> {
        self.main.iter().zip(self.residual()).map(|(m, r)| m + r).collect()
    }
}

/// Splits `alpha_h` into the reversed-path main term and closed-form
/// residual groups. Every group is evaluated from the analytic fields, not
/// from the recorded hologram, so comparing [`AlphaSplit::total`] with
/// [`equivalent_taps`] checks the hologram algebra end to end.
pub fn alpha_split(
    holo: &Hologram,
    weights: &WeightMatrix,
    paths: &PathSet,
    link: &LinkConfig,
) -> Result<AlphaSplit> {
    let geom = &holo.geometry;
    let reference = &holo.reference;
    let (_, c) = scaled_excitation(geom, reference, &weights.values, link.tx_power)?;
    let omega = geom.angular_frequency();
    let (rows, cols) = geom.shape();
    let mn = (rows * cols) as f64;
    let a_r = reference.amplitude;
    let a_u = holo.recording.user_amplitude;
    let rho = weights.rho_used;
    let b = weights.b_used;
    let x_amp = c * rho * a_r;
    let phase = Complex64::from_polar(1.0, reference.phase_offset);
    let er = reference_field(geom, reference);
    // unit-amplitude reference phasor beta
    let beta = er.map(|e| e / a_r);

    let p = path_responses(geom, paths);
    let q: Vec<Complex64> = paths.iter().map(|path| path.composite_gain(omega)).collect();
    // reindexed object wave per path: q_j conj(a_j)
    let p_rev: Vec<ComplexField> = paths
        .iter()
        .zip(&q)
        .map(|(path, qj)| steering_field(geom, &path.direction).map(|a| qj * a.conj()))
        .collect();
    let sum_alpha2: f64 = paths.iter().map(|path| path.gain.norm_sqr()).sum();

    let inner = |f: &dyn Fn(usize, usize) -> Complex64, i: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..rows {
            for n in 0..cols {
                acc += f(m, n) * p[i][(m, n)];
            }
        }
        acc
    };

    let clipped = reindex(&holo.values).map(|w| rho * (w - b));
    let mut split = AlphaSplit {
        main: Vec::new(),
        constant: Vec::new(),
        other_path: Vec::new(),
        conjugate: Vec::new(),
        user_cross: Vec::new(),
        clip: Vec::new(),
    };
    let l = paths.len();
    for i in 0..l {
        split
            .main
            .push(c * rho * mn * a_u * a_r * a_r * phase.conj() * q[i] * q[i]);
        split.constant.push(
            x_amp * (a_r * a_r + a_u * a_u * sum_alpha2 - b) * inner(&|m, n| beta[(m, n)], i),
        );
        let mut other = Complex64::new(0.0, 0.0);
        for (j, pj) in p_rev.iter().enumerate() {
            if j != i {
                other += inner(&|m, n| pj[(m, n)], i);
            }
        }
        split.other_path.push(x_amp * a_u * a_r * phase.conj() * other);
        let mut conjugate = Complex64::new(0.0, 0.0);
        for pj in &p_rev {
            conjugate += inner(&|m, n| beta[(m, n)] * beta[(m, n)] * pj[(m, n)].conj(), i);
        }
        split.conjugate.push(x_amp * a_u * a_r * phase * conjugate);
        let mut cross = Complex64::new(0.0, 0.0);
        for (j, pj) in p_rev.iter().enumerate() {
            for (k, pk) in p_rev.iter().enumerate() {
                if j != k {
                    cross += inner(&|m, n| pj[(m, n)] * pk[(m, n)].conj() * beta[(m, n)], i);
                }
            }
        }
        split.user_cross.push(x_amp * a_u * a_u * cross);
        split.clip.push(
            c * inner(
                &|m, n| (weights.values[(m, n)] - clipped[(m, n)]) * er[(m, n)],
                i,
            ),
        );
    }
    Ok(split)
}

/// `K x K` Toeplitz matrix with `H(i, j) = h[i - j]`.
pub fn build_toeplitz(taps: &BTreeMap<i64, Complex64>, k: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(k, k, |i, j| {
        taps.get(&(i as i64 - j as i64))
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    })
}

/// Block channel `y = H F s + n` with identity precoder `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    pub h: DMatrix<Complex64>,
}

impl LinkChannel {
    pub fn new(taps: &BTreeMap<i64, Complex64>, k: usize) -> Self {
        Self {
            h: build_toeplitz(taps, k),
        }
    }

    pub fn block_length(&self) -> usize {
        self.h.nrows()
    }

    pub fn precoder(&self) -> DMatrix<Complex64> {
        DMatrix::identity(self.block_length(), self.block_length())
    }
}

fn gram(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    h * h.adjoint()
}

fn normalization_scale(h: &DMatrix<Complex64>, mode: SnrNormalization) -> f64 {
    match mode {
        SnrNormalization::Absolute => 1.0,
        SnrNormalization::Normalized => {
            let k = h.nrows() as f64;
            let tr: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            if tr > 0.0 {
                k / tr
            } else {
                0.0
            }
        }
    }
}

/// Eigenvalues of `H H^H` after SNR normalization, cached so many SNR
/// points share one decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpectrum {
    pub eigenvalues: Vec<f64>,
}

impl ChannelSpectrum {
    pub fn new(h: &DMatrix<Complex64>, mode: SnrNormalization) -> Self {
        let s = normalization_scale(h, mode);
        let eig = SymmetricEigen::new(gram(h));
        Self {
            eigenvalues: eig.eigenvalues.iter().map(|l| (l * s).max(0.0)).collect(),
        }
    }

    /// Spectrum of an all-zero channel.
    pub fn silent(k: usize) -> Self {
        Self {
            eigenvalues: vec![0.0; k],
        }
    }

    /// `(1/K) sum log2(1 + gamma lambda)` in bits per symbol.
    pub fn mutual_information(&self, snr_linear: f64) -> f64 {
        let k = self.eigenvalues.len() as f64;
        self.eigenvalues
            .iter()
            .map(|l| (snr_linear * l).ln_1p())
            .sum::<f64>()
            / k
            / std::f64::consts::LN_2
    }

    pub fn mutual_information_db(&self, snr_db: f64) -> f64 {
        self.mutual_information(db_to_linear(snr_db))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn check_inputs(h: &DMatrix<Complex64>, snr_linear: f64) -> Result<()> {
    if !h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("channel matrix"));
    }
    if !(snr_linear >= 0.0 && snr_linear.is_finite()) {
        return Err(Error::InvalidParameter(format!("SNR must be nonnegative, got {snr_linear}")));
    }
    Ok(())
}

/// `(1/K) log2 det(I + gamma H H^H)` via the eigenvalues of `H H^H`.
pub fn mutual_information(h: &DMatrix<Complex64>, snr_linear: f64, mode: SnrNormalization) -> Result<f64> {
    check_inputs(h, snr_linear)?;
    Ok(ChannelSpectrum::new(h, mode).mutual_information(snr_linear))
}

/// Same quantity through a Cholesky log-determinant.
pub fn mutual_information_logdet(
    h: &DMatrix<Complex64>,
    snr_linear: f64,
    mode: SnrNormalization,
) -> Result<f64> {
    check_inputs(h, snr_linear)?;
    let k = h.nrows();
    let s = normalization_scale(h, mode);
    let a = DMatrix::identity(k, k) + gram(h) * Complex64::new(snr_linear * s, 0.0);
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("I + gamma H H^H is not positive definite".into()))?;
    let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.norm().ln()).sum();
    Ok(logdet / k as f64 / std::f64::consts::LN_2)
}

/// Weight synthesis method evaluated on the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Beamformer {
    Recorded(Strategy),
    Rhs,
}

impl Beamformer {
    pub fn label(&self) -> String {
        match self {
            Beamformer::Recorded(s) => format!("rrm_{}", s.name()),
            Beamformer::Rhs => "rhs".to_string(),
        }
    }
}

/// Everything needed to turn a channel realization into a block channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    pub geometry: SurfaceGeometry,
    pub reference: ReferenceWaveSpec,
    pub user_amplitude: f64,
    /// Recording SNR in dB; `None` records without noise.
    pub recording_snr_db: Option<f64>,
    pub recording_symbols: usize,
    pub recording_samples_per_symbol: usize,
    pub recording_seed: u64,
    pub link: LinkConfig,
}

impl LinkScenario {
    pub fn recording_config(&self, paths: &PathSet, seed: u64) -> Result<RecordingConfig> {
        match self.recording_snr_db {
            None => RecordingConfig::new(
                self.user_amplitude,
                0.0,
                self.recording_symbols,
                self.recording_samples_per_symbol,
                seed,
            ),
            Some(snr) => RecordingConfig::with_snr_db(
                self.user_amplitude,
                snr,
                paths,
                self.recording_symbols,
                self.recording_samples_per_symbol,
                seed,
            ),
        }
    }

    pub fn weights(&self, paths: &PathSet, beamformer: Beamformer, seed: u64) -> Result<WeightMatrix> {
        match beamformer {
            Beamformer::Recorded(strategy) => {
                let cfg = self.recording_config(paths, seed)?;
                let holo = record_hologram(&self.geometry, &self.reference, paths, &cfg)?;
                Ok(make_weights(&holo, strategy))
            }
            Beamformer::Rhs => rhs_weights_for_paths(&self.geometry, &self.reference, paths),
        }
    }

    pub fn channel(&self, paths: &PathSet, weights: &WeightMatrix) -> Result<Option<LinkChannel>> {
        if weights.degenerate {
            return Ok(None);
        }
        let taps = equivalent_taps(&self.geometry, &self.reference, &weights.values, paths, &self.link)?;
        Ok(Some(LinkChannel::new(&taps.taps, self.link.block_length)))
    }

    /// Block-channel spectrum for one realization; degenerate weights give
    /// a silent channel.
    pub fn spectrum(&self, paths: &PathSet, beamformer: Beamformer, seed: u64) -> Result<ChannelSpectrum> {
        let weights = self.weights(paths, beamformer, seed)?;
        Ok(match self.channel(paths, &weights)? {
            Some(ch) => ChannelSpectrum::new(&ch.h, self.link.normalization),
            None => {
                log::warn!("degenerate weights for {}", beamformer.label());
                ChannelSpectrum::silent(self.link.block_length)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageConfig {
    pub trials: usize,
    /// Target rate in bits per symbol.
    pub threshold_bits: f64,
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub probability: f64,
    /// Normal-approximation 95% half-width.
    pub ci_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageCurve {
    pub beamformer: Beamformer,
    pub points: Vec<OutagePoint>,
}

/// Monte-Carlo outage `P(MI < threshold)` for each beamformer, all of them
/// evaluated on the same channel realizations and recording noise.
pub fn outage_probability(
    scenario: &LinkScenario,
    channel: &ChannelConfig,
    beamformers: &[Beamformer],
    cfg: &OutageConfig,
) -> Result<Vec<OutageCurve>> {
    scenario.link.validate()?;
    channel.validate()?;
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("outage needs at least one trial".into()));
    }
    if !(cfg.threshold_bits >= 0.0 && cfg.threshold_bits.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "outage threshold must be nonnegative, got {}",
            cfg.threshold_bits
        )));
    }
    let gammas: Vec<f64> = cfg.snr_db.iter().map(|d| db_to_linear(*d)).collect();
    // counts[b][s] per trial, reduced after the parallel map
    let per_trial: Vec<Vec<Vec<bool>>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<Vec<bool>>> {
            let paths = channel.realization(t)?;
            let rec_seed = derive_seed(scenario.recording_seed, t);
            beamformers
                .iter()
                .map(|bf| {
                    let spec = scenario.spectrum(&paths, *bf, rec_seed)?;
                    Ok(gammas
                        .iter()
                        .map(|g| spec.mutual_information(*g) < cfg.threshold_bits)
                        .collect())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = cfg.trials as f64;
    Ok(beamformers
        .iter()
        .enumerate()
        .map(|(b, bf)| OutageCurve {
            beamformer: *bf,
            points: cfg
                .snr_db
                .iter()
                .enumerate()
                .map(|(s, snr)| {
                    let hits = per_trial.iter().filter(|t| t[b][s]).count() as f64;
                    let p = hits / n;
                    OutagePoint {
                        snr_db: *snr,
                        probability: p,
                        ci_half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
                    }
                })
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrc_special_points_match_limits() {
        let beta = 0.25;
        let t0 = 1.0 / (4.0 * beta);
        for eps in [1e-5, -1e-5] {
            assert!((rrc_value(t0 + eps, beta) - rrc_value(t0, beta)).abs() < 1e-3);
        }
        assert!((rrc_value(1e-7, beta) - rrc_value(0.0, beta)).abs() < 1e-6);
    }

    #[test]
    fn rrc_unit_energy_and_symmetric() {
        let q = rrc_impulse(&PulseSpec::default()).unwrap();
        assert_eq!(q.len(), 161);
        let e: f64 = q.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-12);
        for i in 0..q.len() {
            assert_eq!(q[i], q[q.len() - 1 - i]);
        }
    }

    #[test]
    fn rolloff_out_of_range() {
        let spec = PulseSpec {
            rolloff: 1.5,
            ..PulseSpec::default()
        };
        assert!(matches!(rrc_impulse(&spec), Err(Error::InvalidRolloff(_))));
    }

    #[test]
    fn raised_cosine_edges() {
        assert_eq!(raised_cosine(0.0, 0.25), 1.0);
        for l in 1..6 {
            assert!(raised_cosine(l as f64, 0.25).abs() < 1e-15);
        }
        let edge = 2.0;
        assert!((raised_cosine(edge, 0.25) - raised_cosine(edge + 1e-7, 0.25)).abs() < 1e-6);
        assert!((raised_cosine(0.3, 0.0) - sinc(0.3)).abs() < 1e-15);
    }

    #[test]
    fn single_path_zero_delay_is_one_tap() {
        let link = LinkConfig::default();
        let taps = taps_from_gains(&[Complex64::new(0.5, 0.2)], &[0.0], &link).unwrap();
        for (l, v) in &taps {
            if *l == 0 {
                assert!((v - Complex64::new(0.5, 0.2)).norm() < 1e-15);
            } else {
                assert!(v.norm() < 1e-15);
            }
        }
        let h = build_toeplitz(&taps, 16);
        let mi = mutual_information(&h, 10.0, SnrNormalization::Absolute).unwrap();
        let expected = (1.0 + 10.0 * 0.29f64).log2();
        assert!((mi - expected).abs() < 1e-12);
    }

    #[test]
    fn toeplitz_has_negative_lags() {
        let mut taps = BTreeMap::new();
        taps.insert(-1, Complex64::new(2.0, 0.0));
        taps.insert(0, Complex64::new(1.0, 0.0));
        taps.insert(2, Complex64::new(0.0, 3.0));
        let h = build_toeplitz(&taps, 4);
        assert_eq!(h[(0, 1)], Complex64::new(2.0, 0.0));
        assert_eq!(h[(2, 0)], Complex64::new(0.0, 3.0));
        assert_eq!(h[(3, 3)], Complex64::new(1.0, 0.0));
        assert_eq!(h[(0, 3)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn normalized_identity_channel() {
        let mut taps = BTreeMap::new();
        taps.insert(0, Complex64::new(7.0, 0.0));
        let h = build_toeplitz(&taps, 8);
        let mi = mutual_information(&h, 3.0, SnrNormalization::Normalized).unwrap();
        assert!((mi - 2.0).abs() < 1e-12);
        assert!((mutual_information_logdet(&h, 3.0, SnrNormalization::Normalized).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn silent_spectrum_has_zero_rate() {
        assert_eq!(ChannelSpectrum::silent(4).mutual_information(100.0), 0.0);
    }
}
