//! Far-field power patterns of a weighted surface.
//!
//! The surface radiates `x(m, n) = W(m, n) E_r(m, n)` and the far field
//! toward `(theta, phi)` is `sum x(m, n) a_mn(theta, phi)`, with `a` the
//! same steering phasor used for the received waves. Reindexing turns each
//! received wave `a_p` into `conj(a_p)`, so `x` carries `conj(a_p)` terms
//! and the sum peaks where `a = a_p`, i.e. back along the incident paths.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numfmt::sig9;
use crate::surface::{reference_field, steering_unchecked, ComplexField, Direction, ReferenceWaveSpec, SurfaceGeometry};
use crate::{Error, Grid, Result};

/// Power assigned to directions with no radiation at all.
pub const DB_FLOOR: f64 = -300.0;

/// Sampling axes in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternAxes {
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
}

impl PatternAxes {
    /// Uniform grid, `theta` over `[0, 90]` inclusive and `phi` over `[0, 360)`.
    pub fn uniform(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg <= 90.0) {
            return Err(Error::InvalidParameter(format!(
                "pattern step must be in (0, 90] degrees, got {step_deg}"
            )));
        }
        let nt = (90.0 / step_deg + 1e-9).floor() as usize + 1;
        let np = ((360.0 / step_deg) - 1e-9).ceil() as usize;
        Ok(Self {
            theta_deg: (0..nt).map(|i| i as f64 * step_deg).collect(),
            phi_deg: (0..np).map(|i| i as f64 * step_deg).collect(),
        })
    }

    fn phi_wraps(&self) -> bool {
        if self.phi_deg.len() < 3 {
            return false;
        }
        let step = self.phi_deg[1] - self.phi_deg[0];
        let span = self.phi_deg[self.phi_deg.len() - 1] - self.phi_deg[0] + step;
        (span - 360.0).abs() < 1e-6
    }
}

impl Default for PatternAxes {
    fn default() -> Self {
        Self::uniform(0.5).expect("valid default step")
    }
}

/// Normalized power pattern, rows indexed by `theta`, columns by `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternGrid {
    pub axes: PatternAxes,
    /// Power divided by its maximum over the grid.
    pub linear: Grid<f64>,
    pub power_db: Grid<f64>,
    /// Unnormalized maximum of `|AF|^2`.
    pub peak_power: f64,
}

impl PatternGrid {
    fn from_power(axes: PatternAxes, power: Grid<f64>) -> Self {
        let peak = power.max_value();
        let linear = if peak > 0.0 {
            power.map(|p| p / peak)
        } else {
            power.map(|_| 0.0)
        };
        let power_db = linear.map(|p| to_db(*p));
        Self {
            axes,
            linear,
            power_db,
            peak_power: peak,
        }
    }

    pub fn direction(&self, i: usize, j: usize) -> Direction {
        Direction::from_degrees(self.axes.theta_deg[i], self.axes.phi_deg[j])
            .expect("pattern axes lie in the upper half space")
    }

    /// Normalized power in dB at the grid point nearest to `dir`.
    pub fn nearest_db(&self, dir: &Direction) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (i, _) in self.axes.theta_deg.iter().enumerate() {
            for (j, _) in self.axes.phi_deg.iter().enumerate() {
                let d = self.direction(i, j).angle_to_deg(dir);
                if d < best.0 {
                    best = (d, self.power_db[(i, j)]);
                }
            }
        }
        best.1
    }

    /// Median of the normalized power in dB over the grid.
    pub fn median_db(&self) -> f64 {
        let mut v: Vec<f64> = self.power_db.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    /// Writes `theta_deg,phi_deg,power_db` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta_deg,phi_deg,power_db")?;
        for (i, t) in self.axes.theta_deg.iter().enumerate() {
            for (j, p) in self.axes.phi_deg.iter().enumerate() {
                writeln!(out, "{},{},{}", sig9(*t), sig9(*p), sig9(self.power_db[(i, j)]))?;
            }
        }
        Ok(())
    }
}

pub fn to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Element excitation `W o E_r`.
pub fn excitation(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    weights: &Grid<f64>,
) -> Result<ComplexField> {
    weights.ensure_shape(geom.shape())?;
    reference_field(geom, reference).zip_map(weights, |e, w| e * *w)
}

/// Far-field response `sum x(m, n) a_mn(dir)` of an excitation.
pub fn response_at(geom: &SurfaceGeometry, excitation: &ComplexField, dir: &Direction) -> Result<Complex64> {
    excitation.ensure_shape(geom.shape())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..geom.rows() {
        for n in 0..geom.cols() {
            acc += excitation[(m, n)] * steering_unchecked(geom, dir, m, n);
        }
    }
    Ok(acc)
}

/// Normalized power pattern of an excitation over `axes`.
pub fn pattern_of_excitation(
    geom: &SurfaceGeometry,
    excitation: &ComplexField,
    axes: &PatternAxes,
) -> Result<PatternGrid> {
    excitation.ensure_shape(geom.shape())?;
    if axes.theta_deg.is_empty() || axes.phi_deg.is_empty() {
        return Err(Error::InvalidParameter("pattern axes must be nonempty".into()));
    }
    for t in &axes.theta_deg {
        if !(-1e-9..=90.0 + 1e-9).contains(t) {
            return Err(Error::InvalidDirection(format!("theta {t} deg outside [0, 90]")));
        }
    }
    let (rows, cols) = geom.shape();
    let k = geom.k_free();
    let xs: Vec<f64> = (0..rows).map(|m| geom.position(m, 0).0).collect();
    let ys: Vec<f64> = (0..cols).map(|n| geom.position(0, n).1).collect();
    let np = axes.phi_deg.len();
    let power: Vec<f64> = (0..axes.theta_deg.len() * np)
        .into_par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); rows], vec![Complex64::new(0.0, 0.0); cols]),
            |(ex, ey), idx| {
                let theta = axes.theta_deg[idx / np].clamp(0.0, 90.0) * PI / 180.0;
                let phi = axes.phi_deg[idx % np] * PI / 180.0;
                let u = theta.sin() * phi.cos();
                let v = theta.sin() * phi.sin();
                for (e, x) in ex.iter_mut().zip(&xs) {
                    *e = Complex64::from_polar(1.0, -k * x * u);
                }
                for (e, y) in ey.iter_mut().zip(&ys) {
                    *e = Complex64::from_polar(1.0, -k * y * v);
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, exm) in ex.iter().enumerate() {
                    let row = &excitation.as_slice()[m * cols..(m + 1) * cols];
                    let inner: Complex64 = row.iter().zip(ey.iter()).map(|(x, e)| x * e).sum();
                    acc += exm * inner;
                }
                acc.norm_sqr()
            },
        )
        .collect();
    Ok(PatternGrid::from_power(
        axes.clone(),
        Grid::from_vec(axes.theta_deg.len(), np, power)?,
    ))
}

/// Normalized power pattern `|sum W E_r a(theta, phi)|^2` of real weights.
pub fn array_factor(
    geom: &SurfaceGeometry,
    reference: &ReferenceWaveSpec,
    weights: &Grid<f64>,
    axes: &PatternAxes,
) -> Result<PatternGrid> {
    pattern_of_excitation(geom, &excitation(geom, reference, weights)?, axes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub power_db: f64,
}

impl Peak {
    pub fn direction(&self) -> Direction {
        Direction::from_degrees(self.theta_deg, self.phi_deg).expect("peak lies on the pattern grid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    pub peaks: Vec<Peak>,
    pub requested: usize,
    /// False when fewer than `requested` separated maxima exist.
    pub complete: bool,
}

/// Up to `k` local maxima, strongest first, pairwise separated by at least
/// `min_separation_deg` of great-circle angle.
///
/// `theta` neighbours are clamped at the grid edge and `phi` wraps when
/// the axis covers the full circle. Equal powers are ordered by `(theta,
/// phi)`.
pub fn find_peaks(pattern: &PatternGrid, k: usize, min_separation_deg: f64) -> PeakSearch {
    let (nt, np) = pattern.linear.shape();
    let wraps = pattern.axes.phi_wraps();
    let p = &pattern.linear;
    let mut candidates = Vec::new();
    for i in 0..nt {
        for j in 0..np {
            let v = p[(i, j)];
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = i as i64 + di;
                    if ii < 0 || ii >= nt as i64 {
                        continue;
                    }
                    let mut jj = j as i64 + dj;
                    if wraps {
                        jj = jj.rem_euclid(np as i64);
                    } else if jj < 0 || jj >= np as i64 {
                        continue;
                    }
                    if p[(ii as usize, jj as usize)] > v {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                candidates.push((i, j));
            }
        }
    }
    candidates.sort_by(|a, b| p[*b].total_cmp(&p[*a]).then(a.cmp(b)));

    let mut chosen: Vec<(Direction, Peak)> = Vec::new();
    for (i, j) in candidates {
        if chosen.len() == k {
            break;
        }
        let dir = pattern.direction(i, j);
        if chosen.iter().all(|(d, _)| d.angle_to_deg(&dir) >= min_separation_deg) {
            chosen.push((
                dir,
                Peak {
                    theta_deg: pattern.axes.theta_deg[i],
                    phi_deg: pattern.axes.phi_deg[j],
                    power_db: pattern.power_db[(i, j)],
                },
            ));
        }
    }
    let peaks: Vec<Peak> = chosen.into_iter().map(|(_, p)| p).collect();
    PeakSearch {
        complete: peaks.len() == k,
        requested: k,
        peaks,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidelobeMetrics {
    /// Strongest sidelobe point (dB relative to the pattern maximum).
    pub peak_sidelobe_db: f64,
    /// Mean of the linear sidelobe power, in dB.
    pub mean_sidelobe_db: f64,
    /// Number of grid points outside every guard cone.
    pub num_points: usize,
}

/// Sidelobe statistics over grid points farther than `guard_deg` from every
/// mainlobe direction.
pub fn sidelobe_metrics(
    pattern: &PatternGrid,
    mainlobes: &[Direction],
    guard_deg: f64,
) -> Result<SidelobeMetrics> {
    let (nt, np) = pattern.linear.shape();
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    let mut count = 0usize;
    for i in 0..nt {
        for j in 0..np {
            let dir = pattern.direction(i, j);
            if mainlobes.iter().any(|d| d.angle_to_deg(&dir) <= guard_deg) {
                continue;
            }
            let v = pattern.linear[(i, j)];
            sum += v;
            peak = peak.max(v);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::GuardCoversGrid(guard_deg));
    }
    Ok(SidelobeMetrics {
        peak_sidelobe_db: to_db(peak),
        mean_sidelobe_db: to_db(sum / count as f64),
        num_points: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{steering_element, PhaseSign};

    fn geom(r: usize, c: usize) -> SurfaceGeometry {
        SurfaceGeometry::half_wavelength(r, c, 30e9, 3f64.sqrt()).unwrap()
    }

    #[test]
    fn default_axes_sizes() {
        let a = PatternAxes::default();
        assert_eq!(a.theta_deg.len(), 181);
        assert_eq!(a.phi_deg.len(), 720);
        assert_eq!(*a.theta_deg.last().unwrap(), 90.0);
        assert!(a.phi_wraps());
        assert!(PatternAxes::uniform(0.0).is_err());
    }

    #[test]
    fn factored_pattern_matches_double_loop() {
        let g = geom(5, 4);
        let reference = ReferenceWaveSpec::unit(PhaseSign::Plus);
        let weights = Grid::from_fn(5, 4, |m, n| ((m * 3 + n * 5) % 7) as f64 / 7.0);
        let axes = PatternAxes::uniform(15.0).unwrap();
        let pat = array_factor(&g, &reference, &weights, &axes).unwrap();
        let er = reference_field(&g, &reference);
        let mut raw = Vec::new();
        for t in &axes.theta_deg {
            for p in &axes.phi_deg {
                let dir = Direction::from_degrees(*t, *p).unwrap();
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..5 {
                    for n in 0..4 {
                        acc += weights[(m, n)] * er[(m, n)] * steering_element(&g, &dir, m, n).unwrap();
                    }
                }
                raw.push(acc.norm_sqr());
            }
        }
        let peak = raw.iter().cloned().fold(0.0, f64::max);
        for (a, b) in pat.linear.iter().zip(&raw) {
            assert!((a - b / peak).abs() < 1e-9);
        }
        assert!((pat.peak_power - peak).abs() < 1e-9 * peak);
    }

    #[test]
    fn zero_weights_give_floor() {
        let g = geom(3, 3);
        let w = Grid::from_fn(3, 3, |_, _| 0.0);
        let pat = array_factor(&g, &ReferenceWaveSpec::unit(PhaseSign::Plus), &w, &PatternAxes::uniform(30.0).unwrap())
            .unwrap();
        assert!(pat.power_db.iter().all(|v| *v == DB_FLOOR));
    }

    #[test]
    fn conjugate_steering_excitation_points_back() {
        let g = geom(16, 16);
        let dir = Direction::from_degrees(40.0, 100.0).unwrap();
        let x = crate::surface::steering_field(&g, &dir).map(|a| a.conj());
        let pat = pattern_of_excitation(&g, &x, &PatternAxes::uniform(1.0).unwrap()).unwrap();
        let peaks = find_peaks(&pat, 1, 5.0);
        assert!(peaks.complete);
        assert!(peaks.peaks[0].direction().angle_to_deg(&dir) < 1.0);
    }

    #[test]
    fn peak_search_wraps_phi() {
        let axes = PatternAxes::uniform(10.0).unwrap();
        let (nt, np) = (axes.theta_deg.len(), axes.phi_deg.len());
        // maximum at phi = 0 with a slightly lower neighbour at 350
        let linear = Grid::from_fn(nt, np, |i, j| {
            if i == 4 && j == 0 {
                1.0
            } else if i == 4 && j == np - 1 {
                0.9
            } else {
                0.1
            }
        });
        let pat = PatternGrid::from_power(axes, linear);
        let s = find_peaks(&pat, 2, 5.0);
        assert_eq!(s.peaks[0].phi_deg, 0.0);
        assert_eq!(s.peaks[0].theta_deg, 40.0);
        // 350 deg is not a local maximum once phi wraps
        assert!(s.peaks.iter().all(|p| p.phi_deg != 350.0));
    }

    #[test]
    fn incomplete_peak_search() {
        let axes = PatternAxes::uniform(30.0).unwrap();
        let (nt, np) = (axes.theta_deg.len(), axes.phi_deg.len());
        let pat = PatternGrid::from_power(axes, Grid::from_fn(nt, np, |i, _| if i == 0 { 1.0 } else { 0.5 }));
        let s = find_peaks(&pat, 3, 200.0);
        assert!(!s.complete);
        assert_eq!(s.peaks.len(), 1);
        assert_eq!(s.requested, 3);
    }

    #[test]
    fn guard_covering_everything_is_an_error() {
        let axes = PatternAxes::uniform(30.0).unwrap();
        let (nt, np) = (axes.theta_deg.len(), axes.phi_deg.len());
        let pat = PatternGrid::from_power(axes, Grid::from_fn(nt, np, |_, _| 1.0));
        assert!(matches!(
            sidelobe_metrics(&pat, &[Direction::broadside()], 95.0),
            Err(Error::GuardCoversGrid(_))
        ));
        let m = sidelobe_metrics(&pat, &[Direction::broadside()], 10.0).unwrap();
        assert!(m.mean_sidelobe_db.abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_rows() {
        let axes = PatternAxes::uniform(45.0).unwrap();
        let pat = PatternGrid::from_power(axes, Grid::from_fn(3, 8, |i, j| (i + j) as f64 + 1.0));
        let mut out = Vec::new();
        pat.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("theta_deg,phi_deg,power_db"));
        assert_eq!(lines.count(), 24);
        assert!(!text.contains('\r'));
    }
}
