//! Surface geometry and the field algebra shared by recording, reconstruction
//! and beam patterns.
//!
//! Elements are indexed from zero. Element `(m, n)` of an `M x N` surface
//! sits at `x = dx * (m - (M - 1) / 2)`, `y = dy * (n - (N - 1) / 2)`, so the
//! geometric center (the feed) is the origin for every size, even or odd.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::PathSet;
use crate::{Error, Grid, Result, SPEED_OF_LIGHT};

/// An `M x N` grid of complex amplitudes.
pub type ComplexField = Grid<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGeometry {
    rows: usize,
    cols: usize,
    dx: f64,
    dy: f64,
    fc: f64,
    k_free: f64,
    k_sub: f64,
}

impl SurfaceGeometry {
    /// `substrate_index` is `k_sub / k_free` and must be at least 1.
    pub fn new(
        rows: usize,
        cols: usize,
        dx: f64,
        dy: f64,
        fc: f64,
        substrate_index: f64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGeometry(format!(
                "surface must have at least one element, got {rows}x{cols}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite() && dy > 0.0 && dy.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "element spacings must be positive, got dx={dx}, dy={dy}"
            )));
        }
        if !(fc > 0.0 && fc.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "carrier frequency must be positive, got {fc}"
            )));
        }
        if !(substrate_index >= 1.0 && substrate_index.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "substrate index must be >= 1, got {substrate_index}"
            )));
        }
        let k_free = TAU * fc / SPEED_OF_LIGHT;
        Ok(Self {
            rows,
            cols,
            dx,
            dy,
            fc,
            k_free,
            k_sub: substrate_index * k_free,
        })
    }

    /// Half-wavelength spacing in both directions.
    pub fn half_wavelength(rows: usize, cols: usize, fc: f64, substrate_index: f64) -> Result<Self> {
        let lambda = SPEED_OF_LIGHT / fc;
        Self::new(rows, cols, lambda / 2.0, lambda / 2.0, fc, substrate_index)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.fc
    }

    /// Carrier angular frequency `2 pi fc`.
    pub fn angular_frequency(&self) -> f64 {
        TAU * self.fc
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.fc
    }

    pub fn k_free(&self) -> f64 {
        self.k_free
    }

    pub fn k_sub(&self) -> f64 {
        self.k_sub
    }

    /// Element coordinates in meters relative to the feed.
    pub fn position(&self, m: usize, n: usize) -> (f64, f64) {
        let cm = (self.rows as f64 - 1.0) / 2.0;
        let cn = (self.cols as f64 - 1.0) / 2.0;
        (self.dx * (m as f64 - cm), self.dy * (n as f64 - cn))
    }

    /// Feed-to-element distance.
    pub fn feed_distance(&self, m: usize, n: usize) -> f64 {
        let (x, y) = self.position(m, n);
        x.hypot(y)
    }

    fn check_index(&self, m: usize, n: usize) -> Result<()> {
        if m >= self.rows || n >= self.cols {
            return Err(Error::IndexOutOfRange {
                m,
                n,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

/// Elevation `theta` from the surface normal and azimuth `phi`, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// `theta` must lie in `[0, pi/2]`; `phi` is wrapped into `[0, 2 pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        const SLACK: f64 = 1e-12;
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidDirection("angles must be finite".into()));
        }
        if !(-SLACK..=PI / 2.0 + SLACK).contains(&theta) {
            return Err(Error::InvalidDirection(format!(
                "elevation {theta} rad outside [0, pi/2]"
            )));
        }
        Ok(Self {
            theta: theta.clamp(0.0, PI / 2.0),
            phi: wrap_azimuth(phi),
        })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub const fn broadside() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi.to_degrees()
    }

    /// Direction cosines `(sin t cos p, sin t sin p)` in the surface plane.
    pub fn transverse(&self) -> (f64, f64) {
        let s = self.theta.sin();
        (s * self.phi.cos(), s * self.phi.sin())
    }

    /// Great-circle angle to `other` in degrees.
    pub fn angle_to_deg(&self, other: &Direction) -> f64 {
        // atan2 of cross and dot products stays accurate for tiny angles
        let a = self.unit_vector();
        let b = other.unit_vector();
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let sin = cross.iter().map(|c| c * c).sum::<f64>().sqrt();
        let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        sin.atan2(cos).to_degrees()
    }

    fn unit_vector(&self) -> [f64; 3] {
        let (u, v) = self.transverse();
        [u, v, self.theta.cos()]
    }
}

fn wrap_azimuth(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Sign `s` of the reference-wave phase `exp(j s k_sub d_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSign {
    Plus,
    #[default]
    Minus,
}

impl PhaseSign {
    pub fn value(self) -> f64 {
        match self {
            PhaseSign::Plus => 1.0,
            PhaseSign::Minus => -1.0,
        }
    }
}

/// Reference wave launched by the central feed.
///
/// The angular frequency is always the carrier `2 pi fc` of the geometry it
/// is evaluated on; `phase_offset` is the phase difference between the
/// recording and the reconstruction reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceWaveSpec {
    pub amplitude: f64,
    pub phase_offset: f64,
    pub sign: PhaseSign,
}

impl ReferenceWaveSpec {
    pub fn new(amplitude: f64, phase_offset: f64, sign: PhaseSign) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reference amplitude must be nonnegative, got {amplitude}"
            )));
        }
        if !phase_offset.is_finite() {
            return Err(Error::NonFinite("reference phase offset"));
        }
        Ok(Self {
            amplitude,
            phase_offset,
            sign,
        })
    }

    pub fn unit(sign: PhaseSign) -> Self {
        Self {
            amplitude: 1.0,
            phase_offset: 0.0,
            sign,
        }
    }
}

/// `A_r exp(j s k_sub d_r(m, n))` at every element.
pub fn reference_field(geom: &SurfaceGeometry, reference: &ReferenceWaveSpec) -> ComplexField {
    let s = reference.sign.value();
    Grid::from_fn(geom.rows(), geom.cols(), |m, n| {
        Complex64::from_polar(reference.amplitude, s * geom.k_sub() * geom.feed_distance(m, n))
    })
}

/// Steering phase `exp(-j k_free d_mn(theta, phi))` of a plane wave arriving
/// from `dir`, referenced to the surface center.
pub fn steering_element(geom: &SurfaceGeometry, dir: &Direction, m: usize, n: usize) -> Result<Complex64> {
    geom.check_index(m, n)?;
    Ok(steering_unchecked(geom, dir, m, n))
}

#[inline]
pub(crate) fn steering_unchecked(geom: &SurfaceGeometry, dir: &Direction, m: usize, n: usize) -> Complex64 {
    let (u, v) = dir.transverse();
    let (x, y) = geom.position(m, n);
    Complex64::from_polar(1.0, -geom.k_free() * (x * u + y * v))
}

/// Steering vector over the whole surface.
pub fn steering_field(geom: &SurfaceGeometry, dir: &Direction) -> ComplexField {
    Grid::from_fn(geom.rows(), geom.cols(), |m, n| steering_unchecked(geom, dir, m, n))
}

/// Superposition of the incident plane waves, `sum_p g_p a_mn(theta_p, phi_p)`,
/// with `g_p = alpha_p exp(-j omega_c tau_p)` the composite path amplitude.
pub fn object_field(geom: &SurfaceGeometry, paths: &PathSet) -> Result<ComplexField> {
    if paths.is_empty() {
        return Err(Error::EmptyPaths);
    }
    let omega = geom.angular_frequency();
    let weighted: Vec<(Complex64, Direction)> = paths
        .iter()
        .map(|p| (p.composite_gain(omega), p.direction))
        .collect();
    Ok(Grid::from_fn(geom.rows(), geom.cols(), |m, n| {
        weighted
            .iter()
            .map(|(g, d)| g * steering_unchecked(geom, d, m, n))
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Path, PathNormalization};

    const FC: f64 = 30e9;

    fn geom(rows: usize, cols: usize) -> SurfaceGeometry {
        SurfaceGeometry::half_wavelength(rows, cols, FC, 3f64.sqrt()).unwrap()
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(SurfaceGeometry::new(0, 3, 1.0, 1.0, FC, 1.0).is_err());
        assert!(SurfaceGeometry::new(3, 3, 0.0, 1.0, FC, 1.0).is_err());
        assert!(SurfaceGeometry::new(3, 3, 1.0, 1.0, -1.0, 1.0).is_err());
        assert!(SurfaceGeometry::new(3, 3, 1.0, 1.0, FC, 0.5).is_err());
    }

    #[test]
    fn wavenumbers_follow_carrier() {
        let g = geom(4, 4);
        assert!((g.k_free() - TAU * FC / SPEED_OF_LIGHT).abs() < 1e-9);
        assert!((g.k_sub() / g.k_free() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn center_element_has_zero_phase() {
        let g = geom(3, 3);
        let r = ReferenceWaveSpec::new(0.7, 0.0, PhaseSign::Plus).unwrap();
        let e = reference_field(&g, &r);
        assert!((e[(1, 1)] - Complex64::new(0.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn corner_phase_matches_distance_arithmetic() {
        let g = geom(3, 3);
        let lambda = g.wavelength();
        // independent distance: corner sits one spacing away along both axes
        let d = (2.0f64 * (lambda / 2.0).powi(2)).sqrt();
        for sign in [PhaseSign::Plus, PhaseSign::Minus] {
            let e = reference_field(&g, &ReferenceWaveSpec::unit(sign));
            let expected_phase = sign.value() * 3f64.sqrt() * (TAU / lambda) * d;
            assert!((expected_phase.abs() - 6f64.sqrt() * PI).abs() < 1e-9);
            let expected = Complex64::from_polar(1.0, expected_phase);
            assert!((e[(0, 0)] - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn reference_field_is_centrosymmetric() {
        for (rows, cols) in [(3, 3), (4, 6), (5, 2), (1, 7)] {
            let g = geom(rows, cols);
            let e = reference_field(&g, &ReferenceWaveSpec::unit(PhaseSign::Minus));
            for m in 0..rows {
                for n in 0..cols {
                    assert_eq!(e[(m, n)], e[(rows - 1 - m, cols - 1 - n)]);
                }
            }
        }
    }

    #[test]
    fn broadside_steering_is_unity() {
        let g = geom(5, 4);
        let d = Direction::broadside();
        for m in 0..5 {
            for n in 0..4 {
                let a = steering_element(&g, &d, m, n).unwrap();
                assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn endfire_steering_one_spacing_off_center() {
        let g = geom(3, 3);
        let d = Direction::from_degrees(90.0, 0.0).unwrap();
        // zero-based (2, 1) is one-based (3, 2): x = lambda / 2, y = 0
        let a = steering_element(&g, &d, 2, 1).unwrap();
        let (x, y) = g.position(2, 1);
        let brute = Complex64::from_polar(1.0, -g.k_free() * (x * 1.0 + y * 0.0));
        assert!((a - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((a - brute).norm() < 1e-12);
    }

    #[test]
    fn steering_index_out_of_range() {
        let g = geom(3, 3);
        assert!(matches!(
            steering_element(&g, &Direction::broadside(), 3, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn steering_reindexed_is_conjugate() {
        let g = geom(6, 5);
        let d = Direction::from_degrees(37.0, 211.0).unwrap();
        for m in 0..6 {
            for n in 0..5 {
                let a = steering_element(&g, &d, m, n).unwrap();
                let b = steering_element(&g, &d, 5 - m, 4 - n).unwrap();
                assert!((b - a.conj()).norm() < 1e-12);
                assert!((a.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_broadside_path_gives_constant_field() {
        let g = geom(4, 4);
        let paths = PathSet::new(
            vec![Path::new(Complex64::new(1.0, 0.0), 0.0, Direction::broadside()).unwrap()],
            PathNormalization::Raw,
        )
        .unwrap();
        let e = object_field(&g, &paths).unwrap();
        assert!(e.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn conjugate_pair_sums_to_real() {
        // two equal-gain paths whose transverse wavevectors are opposite
        let g = geom(4, 4);
        let a = Direction::from_degrees(30.0, 20.0).unwrap();
        let b = Direction::from_degrees(30.0, 200.0).unwrap();
        let paths = PathSet::new(
            vec![
                Path::new(Complex64::new(1.0, 0.0), 0.0, a).unwrap(),
                Path::new(Complex64::new(1.0, 0.0), 0.0, b).unwrap(),
            ],
            PathNormalization::Raw,
        )
        .unwrap();
        let e = object_field(&g, &paths).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let phase = steering_element(&g, &a, m, n).unwrap().arg();
                assert!(e[(m, n)].im.abs() < 1e-12);
                assert!((e[(m, n)].re - 2.0 * phase.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_paths_rejected() {
        let g = geom(2, 2);
        assert!(matches!(object_field(&g, &PathSet::empty()), Err(Error::EmptyPaths)));
    }

    #[test]
    fn azimuth_wraps() {
        let d = Direction::from_degrees(10.0, -90.0).unwrap();
        assert!((d.phi_deg() - 270.0).abs() < 1e-9);
        assert!(Direction::from_degrees(91.0, 0.0).is_err());
    }
}
