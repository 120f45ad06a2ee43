//! Laguerre-Gaussian beams.
//!
//! Conventions, used consistently by every module:
//! - time dependence `e^{-iωt}`, forward propagation `e^{+ikz}`;
//! - the azimuthal factor is `e^{+ilθ}`;
//! - Gouy phase enters as `e^{-i(2p+|l|+1)·atan(z/z_r)}` and wavefront
//!   curvature as `e^{+ikr²/2R(z)}`;
//! - modes are normalized to unit power over the transverse plane.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{total_power, ComplexField, PhysicalGrid};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams {
    w0: f64,
    zr: f64,
    wavelength: f64,
}

impl BeamParams {
    /// Beam with Rayleigh length derived from the waist: `z_r = π w0² / λ`.
    pub fn new(w0: f64, wavelength: f64) -> Result<Self> {
        Self::raw(w0, PI * w0 * w0 / wavelength, wavelength)
    }

    /// Waist and Rayleigh length passed independently, as the hologram
    /// formula does. No consistency check.
    pub fn raw(w0: f64, zr: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in [("waist", w0), ("Rayleigh length", zr), ("wavelength", wavelength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { w0, zr, wavelength })
    }

    /// Like [`BeamParams::raw`] but requires `z_r = π w0² / λ` to 1e-9 relative.
    pub fn checked(w0: f64, zr: f64, wavelength: f64) -> Result<Self> {
        let b = Self::raw(w0, zr, wavelength)?;
        let expected = PI * w0 * w0 / wavelength;
        if ((zr - expected) / expected).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "Rayleigh length {zr} inconsistent with waist {w0} and wavelength {wavelength} (expected {expected})"
            )));
        }
        Ok(b)
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn zr(&self) -> f64 {
        self.zr
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Beam radius at distance `z` from the waist.
    pub fn radius_at(&self, z: f64) -> f64 {
        self.w0 * (1.0 + (z / self.zr).powi(2)).sqrt()
    }

    pub fn with_waist(&self, w0: f64) -> Result<Self> {
        Self::new(w0, self.wavelength)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    p: u32,
    l: i32,
}

impl ModeIndex {
    pub fn new(p: u32, l: i32) -> Self {
        Self { p, l }
    }

    /// Fundamental radial order with azimuthal index `l`.
    pub fn azimuthal(l: i32) -> Self {
        Self { p: 0, l }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn l(&self) -> i32 {
        self.l
    }
}

/// Generalized Laguerre polynomial `L_p^α(x)` by the three-term recurrence.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn norm_constant(mode: ModeIndex) -> f64 {
    // 2 p! / (π (p+|l|)!)
    let al = mode.l.unsigned_abs();
    let mut ratio = 1.0;
    for k in (mode.p + 1)..=(mode.p + al) {
        ratio /= k as f64;
    }
    (2.0 * ratio / PI).sqrt()
}

struct Profile {
    magnitude: f64,
    phase: f64,
}

fn profile(x: f64, y: f64, z: f64, mode: ModeIndex, beam: &BeamParams) -> Profile {
    let al = mode.l.unsigned_abs();
    let r2 = x * x + y * y;
    let zz = z / beam.zr;
    let w = beam.w0 * (1.0 + zz * zz).sqrt();
    let s = 2.0 * r2 / (w * w);
    let lag = laguerre(mode.p, al as f64, s);
    let radial = if al == 0 { 1.0 } else { s.sqrt().powi(al as i32) };
    let magnitude = norm_constant(mode) / w * radial * lag.abs() * (-r2 / (w * w)).exp();

    let theta = y.atan2(x);
    let gouy = (2 * mode.p + al + 1) as f64 * zz.atan();
    let curvature = if z == 0.0 { 0.0 } else { beam.wavenumber() * r2 * z / (2.0 * (z * z + beam.zr * beam.zr)) };
    let sign = if lag < 0.0 { PI } else { 0.0 };
    Profile { magnitude, phase: mode.l as f64 * theta - gouy + curvature + sign }
}

/// Unit-power LG_{p,l} complex amplitude at `(x, y)` a distance `z` from the waist.
pub fn lg_amplitude(x: f64, y: f64, z: f64, mode: ModeIndex, beam: &BeamParams) -> Complex64 {
    let p = profile(x, y, z, mode, beam);
    Complex64::from_polar(p.magnitude, p.phase)
}

/// Argument of [`lg_amplitude`], evaluated analytically so it stays defined
/// where the amplitude underflows. On the axis of an `l ≠ 0` mode, where the
/// phase is undefined, `atan2(0, 0) = 0` supplies the azimuth.
pub fn lg_phase(x: f64, y: f64, z: f64, mode: ModeIndex, beam: &BeamParams) -> f64 {
    profile(x, y, z, mode, beam).phase
}

/// Samples LG_{p,l} centered on `center`. Logs a warning when the window
/// holds less than 99.9% of the mode power.
pub fn lg_field(grid: &PhysicalGrid, z: f64, mode: ModeIndex, beam: &BeamParams, center: (f64, f64)) -> ComplexField {
    let (x0, y0) = center;
    let field = ComplexField::from_fn(*grid, beam.wavelength(), |x, y| lg_amplitude(x - x0, y - y0, z, mode, beam))
        .expect("grid-shaped values and a validated wavelength");
    let captured = total_power(&field);
    if captured < 0.999 {
        log::warn!("window holds only {:.4} of LG({}, {}) power; enlarge the grid", captured, mode.p, mode.l);
    }
    field
}

/// Discrete inner product `Σ conj(a)·b·dA`.
pub fn mode_overlap(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    if !a.grid().same_sampling(b.grid()) {
        return Err(Error::Shape("overlap of fields on different grids".into()));
    }
    let (la, lb) = (a.wavelength(), b.wavelength());
    if ((la - lb) / la).abs() > 1e-12 {
        return Err(Error::Shape(format!("overlap of fields at wavelengths {la} and {lb}")));
    }
    let nx = a.grid().nx();
    let (va, vb) = (a.values(), b.values());
    let rows = par::map_range(a.grid().ny(), |j| {
        let s = j * nx;
        va[s..s + nx].iter().zip(&vb[s..s + nx]).map(|(p, q)| p.conj() * q).sum::<Complex64>()
    });
    Ok(rows.into_iter().sum::<Complex64>() * a.grid().pixel_area())
}

/// `|⟨a|b⟩|²` for unit-power fields.
pub fn fidelity(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    Ok(mode_overlap(a, b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 702e-9;

    fn beam() -> BeamParams {
        BeamParams::new(0.45e-3, LAMBDA).unwrap()
    }

    #[test]
    fn on_axis_gaussian_peak() {
        let b = beam();
        let a = lg_amplitude(0.0, 0.0, 0.0, ModeIndex::azimuthal(0), &b);
        assert_eq!(a.im, 0.0);
        assert!((a.re - (2.0 / PI).sqrt() / b.w0()).abs() < 1e-9 * a.re);
    }

    #[test]
    fn vortex_core_is_zero() {
        for l in [-3, -1, 1, 2, 10] {
            let a = lg_amplitude(0.0, 0.0, 0.1, ModeIndex::new(1, l), &beam());
            assert_eq!(a.norm(), 0.0);
        }
    }

    #[test]
    fn phase_winds_by_two_pi_l() {
        let b = beam();
        for l in -10..=10 {
            let n = 2000;
            let mut acc = 0.0;
            let ph = |t: f64| lg_phase(b.w0() * t.cos(), b.w0() * t.sin(), 0.0, ModeIndex::azimuthal(l), &b);
            let mut prev = ph(0.0);
            for k in 1..=n {
                let cur = ph(2.0 * PI * k as f64 / n as f64);
                let mut d = cur - prev;
                d -= 2.0 * PI * (d / (2.0 * PI)).round();
                acc += d;
                prev = cur;
            }
            assert!((acc - 2.0 * PI * l as f64).abs() < 1e-6, "l={l} winding {acc}");
        }
    }

    #[test]
    fn laguerre_matches_closed_forms() {
        let x = 0.7;
        let a = 2.0;
        assert!((laguerre(1, a, x) - (1.0 + a - x)).abs() < 1e-15);
        let l2 = (x * x - 2.0 * (a + 2.0) * x + (a + 1.0) * (a + 2.0)) / 2.0;
        assert!((laguerre(2, a, x) - l2).abs() < 1e-14);
    }

    #[test]
    fn beam_constructors() {
        let b = BeamParams::new(1e-3, LAMBDA).unwrap();
        assert!(BeamParams::checked(1e-3, b.zr(), LAMBDA).is_ok());
        assert!(BeamParams::checked(1e-3, b.zr() * 1.01, LAMBDA).is_err());
        assert!(BeamParams::raw(1e-3, 2.0, LAMBDA).is_ok());
        assert!(BeamParams::new(-1.0, LAMBDA).is_err());
    }

    #[test]
    fn overlap_rejects_grid_mismatch() {
        let b = beam();
        let g1 = PhysicalGrid::square(32, 50e-6).unwrap();
        let g2 = PhysicalGrid::square(32, 40e-6).unwrap();
        let f1 = lg_field(&g1, 0.0, ModeIndex::azimuthal(0), &b, (0.0, 0.0));
        let f2 = lg_field(&g2, 0.0, ModeIndex::azimuthal(0), &b, (0.0, 0.0));
        assert!(matches!(mode_overlap(&f1, &f2), Err(Error::Shape(_))));
    }
}
