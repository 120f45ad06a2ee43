//! Scalar free-space propagation and diffraction-order selection.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{angular_frequency, Fft2};
use crate::grid::{ComplexField, PhysicalGrid};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Exact transfer function `exp(i z √(k² − k_x² − k_y²))`; evanescent
    /// components are dropped.
    #[default]
    AngularSpectrum,
    /// Paraxial transfer function `exp(i k z − i z (k_x² + k_y²) / 2k)`.
    Fresnel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub distance: f64,
    pub kernel: Kernel,
    /// Zero-padding factor per axis, ≥ 1.
    pub padding_factor: f64,
}

impl PropagationPlan {
    pub fn new(distance: f64) -> Self {
        Self { distance, kernel: Kernel::AngularSpectrum, padding_factor: 2.0 }
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_padding(mut self, padding_factor: f64) -> Self {
        self.padding_factor = padding_factor;
        self
    }
}

fn padded_len(n: usize, factor: f64) -> usize {
    let m = (n as f64 * factor).ceil() as usize;
    m.max(n) + (m.max(n) - n) % 2
}

/// Largest |z| for which the transfer-function phase is sampled without
/// aliasing on an `m`-point axis of the given pitch.
fn max_distance_axis(m: usize, pitch: f64, k: f64, kernel: Kernel) -> f64 {
    let k_edge = (PI / pitch).min(0.999 * k);
    let kz = match kernel {
        Kernel::AngularSpectrum => (k * k - k_edge * k_edge).sqrt(),
        Kernel::Fresnel => k,
    };
    // |∂φ/∂k_x|·Δk ≤ π with ∂φ/∂k_x = z·k_x/k_z and Δk = 2π/(m·pitch)
    kz * m as f64 * pitch / (2.0 * k_edge)
}

/// Maximum distance `plan` may propagate a field sampled on `grid`.
pub fn max_safe_distance(grid: &PhysicalGrid, wavelength: f64, plan: &PropagationPlan) -> f64 {
    let k = 2.0 * PI / wavelength;
    let (px, py) = grid.pitch();
    let mx = padded_len(grid.nx(), plan.padding_factor);
    let my = padded_len(grid.ny(), plan.padding_factor);
    max_distance_axis(mx, px, k, plan.kernel).min(max_distance_axis(my, py, k, plan.kernel))
}

pub fn propagate(field: &ComplexField, plan: &PropagationPlan) -> Result<ComplexField> {
    if !(plan.padding_factor >= 1.0 && plan.padding_factor.is_finite()) {
        return Err(Error::Configuration(format!("padding factor must be at least 1, got {}", plan.padding_factor)));
    }
    if plan.distance == 0.0 {
        return Ok(field.clone());
    }
    let grid = *field.grid();
    let z = plan.distance;
    let limit = max_safe_distance(&grid, field.wavelength(), plan);
    if z.abs() > limit {
        return Err(Error::Configuration(format!(
            "propagation distance {z} m aliases the transfer function; maximum safe distance is {limit:.6} m \
             (raise padding_factor or refine the grid)"
        )));
    }

    let (nx, ny) = (grid.nx(), grid.ny());
    let mx = padded_len(nx, plan.padding_factor);
    let my = padded_len(ny, plan.padding_factor);
    let (ox, oy) = ((mx - nx) / 2, (my - ny) / 2);
    let mut buf = vec![Complex64::new(0.0, 0.0); mx * my];
    for j in 0..ny {
        buf[(j + oy) * mx + ox..(j + oy) * mx + ox + nx].copy_from_slice(&field.values()[j * nx..(j + 1) * nx]);
    }

    let fft = Fft2::new(mx, my);
    fft.forward(&mut buf);
    let (px, py) = grid.pitch();
    let k = 2.0 * PI / field.wavelength();
    let kernel = plan.kernel;
    par::for_each_row(&mut buf, mx, |v, row| {
        let ky = angular_frequency(v, my, py);
        for (u, s) in row.iter_mut().enumerate() {
            let kx = angular_frequency(u, mx, px);
            let kt2 = kx * kx + ky * ky;
            let h = match kernel {
                Kernel::AngularSpectrum => {
                    let kz2 = k * k - kt2;
                    if kz2 > 0.0 {
                        Complex64::from_polar(1.0, z * kz2.sqrt())
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                Kernel::Fresnel => Complex64::from_polar(1.0, k * z - z * kt2 / (2.0 * k)),
            };
            *s *= h;
        }
    });
    fft.inverse(&mut buf);

    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        out.extend_from_slice(&buf[(j + oy) * mx + ox..(j + oy) * mx + ox + nx]);
    }
    ComplexField::new(grid, out, field.wavelength())
}

/// Ideal thin lens on the optical axis; positive `focal` converges.
pub fn thin_lens(field: &ComplexField, focal: f64) -> Result<ComplexField> {
    if focal == 0.0 || !focal.is_finite() {
        return Err(Error::Domain(format!("lens focal length must be finite and nonzero, got {focal}")));
    }
    let k = 2.0 * PI / field.wavelength();
    let mut out = field.clone();
    out.modulate(|x, y| Complex64::from_polar(1.0, -k * (x * x + y * y) / (2.0 * focal)));
    Ok(out)
}

/// Disk in the spatial-frequency plane selecting one diffraction order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFilter {
    /// `(k_x, k_y)` center, rad/m.
    pub center: (f64, f64),
    /// rad/m
    pub radius: f64,
    /// Shift the passed band by `−center` so the order ends up on axis.
    pub recenter: bool,
}

impl OrderFilter {
    pub fn new(center: (f64, f64), radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Configuration(format!("filter radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius, recenter: true })
    }

    /// Filter for the order carried by a grating of tilt `carrier`, with a
    /// radius of half the carrier magnitude.
    pub fn first_order(carrier: (f64, f64)) -> Result<Self> {
        Self::new(carrier, 0.5 * carrier.0.hypot(carrier.1))
    }

    pub fn without_recentering(mut self) -> Self {
        self.recenter = false;
        self
    }
}

pub fn isolate_order(field: &ComplexField, filter: &OrderFilter) -> Result<ComplexField> {
    let grid = *field.grid();
    let (px, py) = grid.pitch();
    let (cx, cy) = filter.center;
    let r = filter.radius;
    if cx.abs() + r > PI / px || cy.abs() + r > PI / py {
        return Err(Error::Configuration(format!(
            "order filter at ({cx:.4e}, {cy:.4e}) rad/m with radius {r:.4e} leaves the sampled band \
             (Nyquist {:.4e}, {:.4e} rad/m)",
            PI / px,
            PI / py
        )));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let fft = Fft2::new(nx, ny);
    let mut buf = field.values().to_vec();
    fft.forward(&mut buf);
    let r2 = r * r;
    par::for_each_row(&mut buf, nx, |v, row| {
        let ky = angular_frequency(v, ny, py) - cy;
        for (u, s) in row.iter_mut().enumerate() {
            let kx = angular_frequency(u, nx, px) - cx;
            if kx * kx + ky * ky > r2 {
                *s = Complex64::new(0.0, 0.0);
            }
        }
    });
    fft.inverse(&mut buf);
    let mut out = ComplexField::new(grid, buf, field.wavelength())?;
    if filter.recenter && (cx != 0.0 || cy != 0.0) {
        out.modulate(|x, y| Complex64::from_polar(1.0, -(cx * x + cy * y)));
    }
    Ok(out)
}

/// Power-weighted mean transverse wavevector `(k_x, k_y)` of the field.
pub fn spectral_centroid(field: &ComplexField) -> Option<(f64, f64)> {
    let grid = *field.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let (px, py) = grid.pitch();
    let mut buf = field.values().to_vec();
    Fft2::new(nx, ny).forward(&mut buf);
    let rows = par::map_range(ny, |v| {
        let ky = angular_frequency(v, ny, py);
        let mut acc = (0.0, 0.0, 0.0);
        for (u, s) in buf[v * nx..(v + 1) * nx].iter().enumerate() {
            let p = s.norm_sqr();
            acc.0 += p;
            acc.1 += p * angular_frequency(u, nx, px);
            acc.2 += p * ky;
        }
        acc
    });
    let (p, sx, sy) = rows.into_iter().fold((0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    (p > 0.0).then(|| (sx / p, sy / p))
}
