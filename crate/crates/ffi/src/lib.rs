//! C ABI over `rrm-core`.
//!
//! Objects are opaque handles created by `rrm_*_new`-style functions and
//! released with the matching `rrm_*_free`. Every fallible call returns an
//! [`RrmStatus`]; the message of the last failure on the calling thread is
//! available from [`rrm_last_error`]. Panics never cross the boundary.
//!
//! Grids are exchanged row-major (`index = m * cols + n`). Pattern buffers
//! are `theta`-major with the axes of [`rrm_pattern_dims`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use rrm_core::beampattern::{array_factor, PatternAxes};
use rrm_core::channel::{Path, PathNormalization, PathSet};
use rrm_core::holography::{make_weights, record_hologram, rhs_weights_for_paths, Hologram, RecordingConfig, Strategy, WeightMatrix};
use rrm_core::link::{ChannelSpectrum, LinkConfig, LinkScenario, SnrNormalization};
use rrm_core::surface::{Direction, PhaseSign, ReferenceWaveSpec, SurfaceGeometry};
use rrm_core::{Complex64, Error, Grid};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent.
    InvalidArgument = 2,
    /// A caller buffer is smaller than required.
    BufferTooSmall = 3,
    /// The weights are all zero and cannot drive the surface.
    DegenerateWeights = 4,
    /// A numerical routine produced a non-finite value.
    Numerical = 5,
    /// Internal panic caught at the boundary.
    Internal = 6,
}

/// Weight post-processing, matching the `weights.strategy` config values.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrmStrategy {
    None = 0,
    Mean = 1,
    Min = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrmNormalization {
    /// `H` scaled so that `tr(H H^H) / K = 1`.
    Normalized = 0,
    /// `H` unscaled.
    Absolute = 1,
}

/// Surface geometry together with its reference wave.
pub struct RrmSurface {
    geometry: SurfaceGeometry,
    reference: ReferenceWaveSpec,
}

pub struct RrmPaths {
    paths: PathSet,
}

pub struct RrmHologram {
    hologram: Hologram,
}

pub struct RrmWeights {
    weights: WeightMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RrmStatus {
    match err {
        Error::AllZeroWeights => RrmStatus::DegenerateWeights,
        Error::NonFinite(_) => RrmStatus::Numerical,
        _ => RrmStatus::InvalidArgument,
    }
}

struct Fail(RrmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RrmStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RrmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RrmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            RrmStatus::Internal
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_grid(grid: &Grid<f64>, out: *mut f64, len: usize) -> Result<(), Fail> {
    if len < grid.len() {
        return Err(Fail(
            RrmStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", grid.len()),
        ));
    }
    if out.is_null() {
        return Err(null("out"));
    }
    slice::from_raw_parts_mut(out, grid.len()).copy_from_slice(grid.as_slice());
    Ok(())
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rrm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn rrm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a `rows x cols` surface with half-wavelength spacing.
///
/// `reference_sign` selects the reference phase `exp(+j k_sub d)` when
/// positive and `exp(-j k_sub d)` otherwise.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rrm_surface_new(
    rows: usize,
    cols: usize,
    carrier_hz: f64,
    substrate_index: f64,
    reference_amplitude: f64,
    reference_phase_rad: f64,
    reference_sign: i32,
    out: *mut *mut RrmSurface,
) -> RrmStatus {
    guard(|| {
        let geometry = SurfaceGeometry::half_wavelength(rows, cols, carrier_hz, substrate_index)?;
        let sign = if reference_sign > 0 { PhaseSign::Plus } else { PhaseSign::Minus };
        let reference = ReferenceWaveSpec::new(reference_amplitude, reference_phase_rad, sign)?;
        write_out(out, RrmSurface { geometry, reference }, "out")
    })
}

/// # Safety
/// `surface` must be null or a handle from [`rrm_surface_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rrm_surface_free(surface: *mut RrmSurface) {
    free_handle(surface)
}

/// Builds a path set from `count` parallel arrays. Delays are in seconds,
/// angles in degrees. With `unit_power` nonzero the gains are rescaled to
/// unit total power.
///
/// # Safety
/// Each array must hold `count` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrm_paths_new(
    count: usize,
    amplitude: *const f64,
    phase_rad: *const f64,
    delay_s: *const f64,
    theta_deg: *const f64,
    phi_deg: *const f64,
    unit_power: i32,
    out: *mut *mut RrmPaths,
) -> RrmStatus {
    guard(|| {
        let amp = input(amplitude, count, "amplitude")?;
        let ph = input(phase_rad, count, "phase_rad")?;
        let dl = input(delay_s, count, "delay_s")?;
        let th = input(theta_deg, count, "theta_deg")?;
        let phi = input(phi_deg, count, "phi_deg")?;
        let list = (0..count)
            .map(|i| {
                Path::new(
                    Complex64::from_polar(amp[i], ph[i]),
                    dl[i],
                    Direction::from_degrees(th[i], phi[i])?,
                )
            })
            .collect::<rrm_core::Result<Vec<_>>>()?;
        let normalization = if unit_power != 0 {
            PathNormalization::UnitPower
        } else {
            PathNormalization::Raw
        };
        let paths = PathSet::new(list, normalization)?;
        write_out(out, RrmPaths { paths }, "out")
    })
}

/// # Safety
/// `paths` must be null or a handle from [`rrm_paths_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rrm_paths_free(paths: *mut RrmPaths) {
    free_handle(paths)
}

/// Records a hologram. `noise_power = 0` gives the noise-free recording;
/// otherwise `duration_symbols * samples_per_symbol` noisy samples are
/// averaged per element, drawn from `seed`.
///
/// # Safety
/// `surface` and `paths` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrm_hologram_record(
    surface: *const RrmSurface,
    paths: *const RrmPaths,
    user_amplitude: f64,
    noise_power: f64,
    duration_symbols: usize,
    samples_per_symbol: usize,
    seed: u64,
    out: *mut *mut RrmHologram,
) -> RrmStatus {
    guard(|| {
        let s = as_ref(surface, "surface")?;
        let p = as_ref(paths, "paths")?;
        let cfg = RecordingConfig::new(user_amplitude, noise_power, duration_symbols, samples_per_symbol, seed)?;
        let hologram = record_hologram(&s.geometry, &s.reference, &p.paths, &cfg)?;
        write_out(out, RrmHologram { hologram }, "out")
    })
}

/// Copies the recorded powers into `out` (row-major, `rows * cols` values).
///
/// # Safety
/// `hologram` must be live; `out` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rrm_hologram_values(hologram: *const RrmHologram, out: *mut f64, len: usize) -> RrmStatus {
    guard(|| copy_grid(&as_ref(hologram, "hologram")?.hologram.values, out, len))
}

/// # Safety
/// `hologram` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rrm_hologram_free(hologram: *mut RrmHologram) {
    free_handle(hologram)
}

/// Reindexes and post-processes a hologram into amplitude weights.
/// All-zero results are returned with status `DegenerateWeights` and a
/// valid handle.
///
/// # Safety
/// `hologram` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrm_weights_from_hologram(
    hologram: *const RrmHologram,
    strategy: RrmStrategy,
    out: *mut *mut RrmWeights,
) -> RrmStatus {
    guard(|| {
        let h = as_ref(hologram, "hologram")?;
        let strategy = match strategy {
            RrmStrategy::None => Strategy::None,
            RrmStrategy::Mean => Strategy::Mean,
            RrmStrategy::Min => Strategy::Min,
        };
        let weights = make_weights(&h.hologram, strategy);
        let degenerate = weights.degenerate;
        write_out(out, RrmWeights { weights }, "out")?;
        if degenerate {
            return Err(Fail(RrmStatus::DegenerateWeights, "weight matrix is all zero".into()));
        }
        Ok(())
    })
}

/// Perfect-CSI holographic weights aimed at every path.
///
/// # Safety
/// `surface` and `paths` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrm_weights_rhs(
    surface: *const RrmSurface,
    paths: *const RrmPaths,
    out: *mut *mut RrmWeights,
) -> RrmStatus {
    guard(|| {
        let s = as_ref(surface, "surface")?;
        let p = as_ref(paths, "paths")?;
        let weights = rhs_weights_for_paths(&s.geometry, &s.reference, &p.paths)?;
        write_out(out, RrmWeights { weights }, "out")
    })
}

/// Copies the weights into `out` (row-major, `rows * cols` values).
///
/// # Safety
/// `weights` must be live; `out` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rrm_weights_values(weights: *const RrmWeights, out: *mut f64, len: usize) -> RrmStatus {
    guard(|| copy_grid(&as_ref(weights, "weights")?.weights.values, out, len))
}

/// # Safety
/// `weights` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rrm_weights_free(weights: *mut RrmWeights) {
    free_handle(weights)
}

/// Axis lengths of the uniform pattern grid with step `step_deg`.
///
/// # Safety
/// `theta_count` and `phi_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrm_pattern_dims(step_deg: f64, theta_count: *mut usize, phi_count: *mut usize) -> RrmStatus {
    guard(|| {
        if theta_count.is_null() || phi_count.is_null() {
            return Err(null("theta_count/phi_count"));
        }
        let axes = PatternAxes::uniform(step_deg)?;
        *theta_count = axes.theta_deg.len();
        *phi_count = axes.phi_deg.len();
        Ok(())
    })
}

/// Normalized far-field power in dB, `theta`-major, on the grid of
/// [`rrm_pattern_dims`].
///
/// # Safety
/// Handles must be live; `out_db` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rrm_pattern_db(
    surface: *const RrmSurface,
    weights: *const RrmWeights,
    step_deg: f64,
    out_db: *mut f64,
    len: usize,
) -> RrmStatus {
    guard(|| {
        let s = as_ref(surface, "surface")?;
        let w = as_ref(weights, "weights")?;
        let axes = PatternAxes::uniform(step_deg)?;
        let pattern = array_factor(&s.geometry, &s.reference, &w.weights.values, &axes)?;
        copy_grid(&pattern.power_db, out_db, len)
    })
}

/// Per-symbol mutual information (bits) of the equivalent `K x K` block
/// channel at `count` SNR points.
///
/// # Safety
/// Handles must be live; `snr_db` must hold `count` readable values and
/// `out_bits` `count` writable values.
#[no_mangle]
pub unsafe extern "C" fn rrm_mutual_information(
    surface: *const RrmSurface,
    paths: *const RrmPaths,
    weights: *const RrmWeights,
    block_length: usize,
    normalization: RrmNormalization,
    snr_db: *const f64,
    count: usize,
    out_bits: *mut f64,
) -> RrmStatus {
    guard(|| {
        let s = as_ref(surface, "surface")?;
        let p = as_ref(paths, "paths")?;
        let w = as_ref(weights, "weights")?;
        let snrs = input(snr_db, count, "snr_db")?;
        if count > 0 && out_bits.is_null() {
            return Err(null("out_bits"));
        }
        let link = LinkConfig {
            block_length,
            normalization: match normalization {
                RrmNormalization::Normalized => SnrNormalization::Normalized,
                RrmNormalization::Absolute => SnrNormalization::Absolute,
            },
            ..LinkConfig::default()
        };
        link.validate()?;
        let scenario = LinkScenario {
            geometry: s.geometry,
            reference: s.reference,
            user_amplitude: 1.0,
            recording_snr_db: None,
            recording_symbols: 1,
            recording_samples_per_symbol: 1,
            recording_seed: 0,
            link,
        };
        let channel = scenario
            .channel(&p.paths, &w.weights)?
            .ok_or_else(|| Fail(RrmStatus::DegenerateWeights, "weight matrix is all zero".into()))?;
        let spectrum = ChannelSpectrum::new(&channel.h, link.normalization);
        let out = slice::from_raw_parts_mut(out_bits, count);
        for (o, snr) in out.iter_mut().zip(snrs) {
            if !snr.is_finite() {
                return Err(Fail(RrmStatus::InvalidArgument, format!("SNR must be finite, got {snr}")));
            }
            *o = spectrum.mutual_information_db(*snr);
        }
        Ok(())
    })
}
