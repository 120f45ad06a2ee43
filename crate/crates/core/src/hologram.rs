//! Phase-hologram synthesis for a pixelated reflective SLM.
//!
//! The frame value at each pixel is the wrapped sum of three phase terms,
//! scaled to 8 bits:
//!
//! ```text
//! φ(x, y) = mod[ arg LG_{0,l}(x − x0, y − y0; z, w0, z_r)
//!              ∓ (π·10³ / λ) · (1 / f_mm) · (ast·(x − x_l0)² + (y − y_l0)²)
//!              + x·k_x + y·k_y , 2π ]
//! gray    = ⌊φ · 256 / 2π⌋
//! ```
//!
//! The device imprints `e^{+iφ}`, so the order deflected along `+(k_x, k_y)`
//! carries `e^{+ilθ}` and raises the azimuthal index by `l`. The lens term
//! converges for positive `f_mm` unless [`HologramSpec::lens_converging`] is
//! cleared.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, PhysicalGrid};
use crate::lg::{lg_phase, BeamParams, ModeIndex};
use crate::par;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HologramSpec {
    /// Charge of the phase singularity.
    pub l: i32,
    pub singularity_center: (f64, f64),
    pub beam: BeamParams,
    /// Distance argument of the LG phase term.
    pub z: f64,
    /// Focal length of the lens term in millimeters; `None` disables it.
    pub lens_focal_mm: Option<f64>,
    pub lens_center: (f64, f64),
    pub ast: f64,
    /// Tilt `(k_x, k_y)` in rad/m.
    pub grating: (f64, f64),
    pub wavelength: f64,
    pub lens_converging: bool,
}

impl HologramSpec {
    /// Flat hologram: no singularity, lens or tilt.
    pub fn identity(beam: BeamParams) -> Self {
        Self {
            l: 0,
            singularity_center: (0.0, 0.0),
            beam,
            z: 0.0,
            lens_focal_mm: None,
            lens_center: (0.0, 0.0),
            ast: 1.0,
            grating: (0.0, 0.0),
            wavelength: beam.wavelength(),
            lens_converging: true,
        }
    }

    /// Fork hologram: charge `l` at `center` superposed on a tilt.
    pub fn fork(beam: BeamParams, l: i32, center: (f64, f64), grating: (f64, f64)) -> Self {
        Self { l, singularity_center: center, grating, ..Self::identity(beam) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ast.is_finite() && self.ast > 0.0) {
            return Err(Error::Domain(format!("ast must be positive, got {}", self.ast)));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::Domain(format!("wavelength must be positive, got {}", self.wavelength)));
        }
        if let Some(f) = self.lens_focal_mm {
            if f == 0.0 || !f.is_finite() {
                return Err(Error::Domain(format!("lens focal length must be nonzero, got {f} mm")));
            }
        }
        Ok(())
    }

    /// Lens phase term alone (unwrapped).
    pub fn lens_phase(&self, x: f64, y: f64) -> f64 {
        match self.lens_focal_mm {
            None => 0.0,
            Some(f_mm) => {
                let (xl, yl) = self.lens_center;
                let sign = if self.lens_converging { -1.0 } else { 1.0 };
                sign * (PI * 1e3 / self.wavelength) / f_mm * (self.ast * (x - xl).powi(2) + (y - yl).powi(2))
            }
        }
    }

    /// Upper bound on |∇φ| (rad/m) over the disk of `radius` around
    /// `center`, excluding the singular azimuthal term.
    pub fn max_smooth_gradient(&self, center: (f64, f64), radius: f64) -> f64 {
        let (kx, ky) = self.grating;
        let mut g = kx.hypot(ky);
        if let Some(f_mm) = self.lens_focal_mm {
            let (xl, yl) = self.lens_center;
            let reach = (center.0 - xl).hypot(center.1 - yl) + radius;
            let k = TWO_PI / self.wavelength;
            g += k * reach * self.ast.max(1.0) / (f_mm.abs() * 1e-3);
        }
        g
    }
}

/// Wraps any real phase into `[0, 2π)`.
#[inline]
pub fn wrap_phase(v: f64) -> f64 {
    let r = v.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

pub fn ideal_phase(spec: &HologramSpec, x: f64, y: f64) -> f64 {
    let (x0, y0) = spec.singularity_center;
    let vortex = lg_phase(x - x0, y - y0, spec.z, ModeIndex::azimuthal(spec.l), &spec.beam);
    let (kx, ky) = spec.grating;
    wrap_phase(vortex + spec.lens_phase(x, y) + x * kx + y * ky)
}

/// `⌊φ·256/2π⌋`, clamped to `0..=255`.
#[inline]
pub fn quantize(phase: f64) -> u8 {
    let g = (phase * 256.0 / TWO_PI).floor();
    g.clamp(0.0, 255.0) as u8
}

/// 8-bit frame, stored top row first (row 0 is the largest `y`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!("{} bytes for a {width}x{height} image", data.len())));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Value at display position (`col`, `row`).
    pub fn at(&self, col: usize, row: usize) -> u8 {
        self.data[row * self.width + col]
    }

    /// Value at grid column `i`, grid row `j` (y ascending).
    pub fn at_grid(&self, i: usize, j: usize) -> u8 {
        self.at(i, self.height - 1 - j)
    }

    pub fn histogram(&self) -> [usize; 256] {
        let mut h = [0usize; 256];
        for &v in &self.data {
            h[v as usize] += 1;
        }
        h
    }
}

pub fn render(spec: &HologramSpec, grid: &PhysicalGrid) -> GrayImage {
    let (w, h) = (grid.nx(), grid.ny());
    let mut data = vec![0u8; w * h];
    par::for_each_row(&mut data, w, |row, out| {
        let y = grid.y(h - 1 - row);
        for (i, v) in out.iter_mut().enumerate() {
            *v = quantize(ideal_phase(spec, grid.x(i), y));
        }
    });
    GrayImage { width: w, height: h, data }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceModel {
    /// Phase at the top gray level, radians.
    pub max_phase: f64,
    /// Modulated fraction of each pixel's area.
    pub fill_factor: f64,
    /// Reflected power fraction.
    pub reflectivity: f64,
    pub gray_levels: u16,
}

impl DeviceModel {
    pub fn new(max_phase: f64, fill_factor: f64, reflectivity: f64) -> Result<Self> {
        let d = Self { max_phase, fill_factor, reflectivity, gray_levels: 256 };
        d.validate()?;
        Ok(d)
    }

    /// 2π depth, full fill, lossless.
    pub fn ideal() -> Self {
        Self { max_phase: TWO_PI, fill_factor: 1.0, reflectivity: 1.0, gray_levels: 256 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_phase > 0.0 && self.max_phase <= TWO_PI + 1e-12) {
            return Err(Error::Domain(format!("max_phase must be in (0, 2π], got {}", self.max_phase)));
        }
        if !(self.fill_factor > 0.0 && self.fill_factor <= 1.0) {
            return Err(Error::Domain(format!("fill_factor must be in (0, 1], got {}", self.fill_factor)));
        }
        if !(self.reflectivity > 0.0 && self.reflectivity <= 1.0) {
            return Err(Error::Domain(format!("reflectivity must be in (0, 1], got {}", self.reflectivity)));
        }
        if !(2..=256).contains(&self.gray_levels) {
            return Err(Error::Domain(format!("gray_levels must be in 2..=256, got {}", self.gray_levels)));
        }
        Ok(())
    }

    /// Width of the dead border strip on each pixel edge, as a fraction of the pitch.
    fn dead_border(&self) -> f64 {
        (1.0 - self.fill_factor.sqrt()) / 2.0
    }
}

impl Default for DeviceModel {
    /// 1.8π depth, 90% fill, 75% reflectivity.
    fn default() -> Self {
        Self { max_phase: 1.8 * PI, fill_factor: 0.90, reflectivity: 0.75, gray_levels: 256 }
    }
}

/// Linear phase response `gray / (levels − 1) · max_phase`.
#[inline]
pub fn device_phase(gray: u8, device: &DeviceModel) -> f64 {
    gray as f64 / (device.gray_levels - 1) as f64 * device.max_phase
}

/// Position of the SLM grid origin in simulation-grid coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Placement {
    pub offset: (f64, f64),
}

impl Placement {
    pub fn centered() -> Self {
        Self::default()
    }
}

/// Reflects `input` off an SLM showing `image`.
///
/// Each simulation pixel takes the response of the SLM pixel under its
/// center. A sample landing in the dead border strip of its SLM pixel, or
/// outside the SLM, is reflected without phase change. All samples are
/// scaled by `√reflectivity`.
pub fn apply_hologram(
    input: &ComplexField,
    image: &GrayImage,
    slm_grid: &PhysicalGrid,
    device: &DeviceModel,
    placement: Placement,
) -> Result<ComplexField> {
    device.validate()?;
    if image.width() != slm_grid.nx() || image.height() != slm_grid.ny() {
        return Err(Error::Shape(format!(
            "{}x{} image does not match the {}x{} SLM grid",
            image.width(),
            image.height(),
            slm_grid.nx(),
            slm_grid.ny()
        )));
    }
    let sim = *input.grid();
    let (ox, oy) = placement.offset;
    let (sx0, sx1) = slm_grid.x_range();
    let (sy0, sy1) = slm_grid.y_range();
    let (fx0, fx1) = sim.x_range();
    let (fy0, fy1) = sim.y_range();
    if sx1 + ox <= fx0 || sx0 + ox >= fx1 || sy1 + oy <= fy0 || sy0 + oy >= fy1 {
        return Err(Error::Shape("SLM placement lies entirely outside the field window".into()));
    }

    let amp = device.reflectivity.sqrt();
    let lut: Vec<Complex64> = (0..=255u8).map(|g| Complex64::from_polar(amp, device_phase(g, device))).collect();
    let dead = Complex64::new(amp, 0.0);
    let border = device.dead_border();
    let (spx, spy) = slm_grid.pitch();

    let mut out = input.clone();
    par::for_each_row(out.values_mut(), sim.nx(), |j, row| {
        let yl = sim.y(j) - oy;
        let fj = (yl - sy0) / spy;
        for (i, v) in row.iter_mut().enumerate() {
            let xl = sim.x(i) - ox;
            let fi = (xl - sx0) / spx;
            let inside = fi >= 0.0 && fj >= 0.0 && fi < slm_grid.nx() as f64 && fj < slm_grid.ny() as f64;
            if !inside {
                *v *= dead;
                continue;
            }
            let (u, w) = (fi.fract(), fj.fract());
            let modulated = u >= border && u <= 1.0 - border && w >= border && w <= 1.0 - border;
            if modulated {
                *v *= lut[image.at_grid(fi as usize, fj as usize) as usize];
            } else {
                *v *= dead;
            }
        }
    });
    Ok(out)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Power fraction diffracted into grating order `order` by a blazed sawtooth
/// with one pixel per gray level (`levels` pixels per period).
///
/// The pixel transmittance is `e^{iφ_g}` on a centered square of area
/// `fill_factor` and 1 on the dead border. Its Fourier coefficient along the
/// grating direction is evaluated in closed form per pixel; power is
/// multiplied by the reflectivity.
pub fn order_efficiency(device: &DeviceModel, levels: usize, order: i64) -> f64 {
    assert!(levels >= 2, "need at least two phase levels");
    let n = levels as f64;
    let m = order as f64;
    let w = device.fill_factor.sqrt();
    let aperture = w * sinc(w * m / n);
    let mut acc = Complex64::new(0.0, 0.0);
    for g in 0..levels {
        let phi = g as f64 / (n - 1.0) * device.max_phase;
        let step = Complex64::from_polar(1.0, phi) - 1.0;
        acc += step * Complex64::from_polar(1.0, -TWO_PI * m * (g as f64 + 0.5) / n);
    }
    let mut c = acc * (w * aperture / n);
    if order == 0 {
        c += 1.0;
    }
    device.reflectivity * c.norm_sqr()
}

pub fn first_order_efficiency(device: &DeviceModel, levels: usize) -> f64 {
    order_efficiency(device, levels, 1)
}

/// Net phase winding (radians) of `phase` around the circle of `radius`
/// about `center`, from `samples` wrapped steps.
pub fn phase_winding<F>(phase: F, center: (f64, f64), radius: f64, samples: usize) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let at = |k: usize| {
        let t = TWO_PI * k as f64 / samples as f64;
        phase(center.0 + radius * t.cos(), center.1 + radius * t.sin())
    };
    let mut prev = at(0);
    let mut acc = 0.0;
    for k in 1..=samples {
        let cur = at(k % samples);
        let mut d = cur - prev;
        d -= TWO_PI * (d / TWO_PI).round();
        acc += d;
        prev = cur;
    }
    acc
}

#[inline]
fn gray_step(a: u8, b: u8) -> i32 {
    let d = (b as i32 - a as i32).rem_euclid(256);
    if d > 128 {
        d - 256
    } else {
        d
    }
}

/// Net winding, in turns, of the gray-level phase along the boundary of the
/// square of pixels `[c - h, c + h) x [r - h, r + h)`, traversed
/// counterclockwise in physical `(x, y)`.
pub fn image_winding(image: &GrayImage, col: usize, row: usize, half: usize) -> Result<i32> {
    if half == 0 || col < half || row < half || col + half > image.width() || row + half > image.height() {
        return Err(Error::Domain("winding loop leaves the image".into()));
    }
    let (c0, c1, r0, r1) = (col - half, col + half - 1, row - half, row + half - 1);
    let mut path = Vec::new();
    for c in c0..c1 {
        path.push((c, r1));
    }
    for r in (r0 + 1..=r1).rev() {
        path.push((c1, r));
    }
    for c in (c0 + 1..=c1).rev() {
        path.push((c, r0));
    }
    for r in r0..r1 {
        path.push((c0, r));
    }
    let mut acc = 0;
    for k in 0..path.len() {
        let (a, b) = (path[k], path[(k + 1) % path.len()]);
        acc += gray_step(image.at(a.0, a.1), image.at(b.0, b.1));
    }
    // a closed loop of wrapped steps always sums to a whole number of turns
    Ok(acc / 256)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singularity {
    /// Display column/row of the plaquette's top-left pixel.
    pub col: usize,
    pub row: usize,
    pub charge: i32,
}

/// Every 2×2 pixel plaquette whose gray-level phase winds.
pub fn singularities(image: &GrayImage) -> Vec<Singularity> {
    let (w, h) = (image.width(), image.height());
    let per_row = par::map_range(h - 1, |r| {
        let mut found = Vec::new();
        for c in 0..w - 1 {
            let ring = [image.at(c, r + 1), image.at(c + 1, r + 1), image.at(c + 1, r), image.at(c, r)];
            let s: i32 = (0..4).map(|k| gray_step(ring[k], ring[(k + 1) % 4])).sum();
            if s != 0 {
                found.push(Singularity { col: c, row: r, charge: s / 256 });
            }
        }
        found
    });
    per_row.into_iter().flatten().collect()
}
