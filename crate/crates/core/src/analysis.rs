//! OAM content of fields and the hologram-plus-fiber mode analyzer.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, PhysicalGrid};
use crate::hologram::{apply_hologram, render, DeviceModel, HologramSpec, Placement};
use crate::lg::{lg_field, mode_overlap, BeamParams, ModeIndex};
use crate::par;
use crate::propagation::{isolate_order, OrderFilter};

/// Power fraction per azimuthal index over `[-max_l, max_l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OamSpectrum {
    max_l: i32,
    weights: Vec<f64>,
    residual: f64,
}

impl OamSpectrum {
    pub fn max_l(&self) -> i32 {
        self.max_l
    }

    pub fn l_range(&self) -> std::ops::RangeInclusive<i32> {
        -self.max_l..=self.max_l
    }

    pub fn weight(&self, l: i32) -> f64 {
        if l.abs() > self.max_l {
            return 0.0;
        }
        self.weights[(l + self.max_l) as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Power outside the index range.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Index with the largest weight (lowest index on ties).
    pub fn argmax(&self) -> i32 {
        let mut best = 0;
        for (k, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = k;
            }
        }
        best as i32 - self.max_l
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = self.l_range().map(|l| l.to_string()).collect();
        header.push("residual".into());
        w.write_record(&header).map_err(csv_err)?;
        let mut row: Vec<String> = self.weights.iter().map(|v| format!("{v:.12e}")).collect();
        row.push(format!("{:.12e}", self.residual));
        w.write_record(&row).map_err(csv_err)?;
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Keys cubic convolution weights (a = −0.5) for offsets −1, 0, 1, 2.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0, -1.5 * t3 + 2.0 * t2 + 0.5 * t, 0.5 * t3 - 0.5 * t2]
}

fn bicubic(field: &ComplexField, x: f64, y: f64) -> Complex64 {
    let g = field.grid();
    let (px, py) = g.pitch();
    let fx = (x - g.x_range().0) / px - 0.5;
    let fy = (y - g.y_range().0) / py - 0.5;
    let (i0, j0) = (fx.floor(), fy.floor());
    let (wx, wy) = (cubic_weights(fx - i0), cubic_weights(fy - j0));
    let (i0, j0) = (i0 as i64, j0 as i64);
    let (nx, ny) = (g.nx() as i64, g.ny() as i64);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, wyb) in wy.iter().enumerate() {
        let j = j0 - 1 + b as i64;
        if j < 0 || j >= ny {
            continue;
        }
        let mut row = Complex64::new(0.0, 0.0);
        for (a, wxa) in wx.iter().enumerate() {
            let i = i0 - 1 + a as i64;
            if i < 0 || i >= nx {
                continue;
            }
            row += field.get(i as usize, j as usize) * wxa;
        }
        acc += row * wyb;
    }
    acc
}

/// Azimuthal (OAM) power spectrum about `center`.
///
/// The field is resampled on polar rings out to the largest circle that fits
/// inside the window, each ring is Fourier analyzed in angle, and ring
/// powers are accumulated per harmonic. Weights are fractions of the total
/// power inside that circle, so weights plus residual sum to one.
pub fn oam_spectrum(field: &ComplexField, center: (f64, f64), max_l: i32) -> Result<OamSpectrum> {
    let g = field.grid();
    let (cx, cy) = center;
    if !g.contains(cx, cy) || max_l < 0 {
        return Err(Error::Domain(format!("spectrum center ({cx}, {cy}) outside the grid or negative max_l {max_l}")));
    }
    let (px, py) = g.pitch();
    let pitch = px.min(py);
    let (x0, x1) = g.x_range();
    let (y0, y1) = g.y_range();
    let r_max = (cx - x0 - px / 2.0).min(x1 - px / 2.0 - cx).min(cy - y0 - py / 2.0).min(y1 - py / 2.0 - cy);
    let dr = pitch / 2.0;
    let n_r = (r_max / dr).floor() as usize;
    if n_r < 2 {
        return Err(Error::Domain("spectrum center too close to the grid edge".into()));
    }
    let min_angles = (4 * (max_l as usize + 1)).max((2.0 * PI * r_max / dr).ceil() as usize);
    let n_t = min_angles.next_power_of_two();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_t);

    let rings = par::map_range(n_r, |k| {
        let r = (k as f64 + 0.5) * dr;
        let mut ring: Vec<Complex64> = (0..n_t)
            .map(|m| {
                let t = 2.0 * PI * m as f64 / n_t as f64;
                bicubic(field, cx + r * t.cos(), cy + r * t.sin())
            })
            .collect();
        fft.process(&mut ring);
        let scale = 2.0 * PI * r * dr / (n_t * n_t) as f64;
        ring.iter().map(|a| a.norm_sqr() * scale).collect::<Vec<f64>>()
    });

    let mut per_harmonic = vec![0.0; n_t];
    for ring in &rings {
        for (acc, p) in per_harmonic.iter_mut().zip(ring) {
            *acc += p;
        }
    }
    let total: f64 = per_harmonic.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("field has no power inside the analysis circle".into()));
    }
    let harmonic = |l: i32| if l >= 0 { l as usize } else { (n_t as i64 + l as i64) as usize };
    let weights: Vec<f64> = (-max_l..=max_l).map(|l| per_harmonic[harmonic(l)] / total).collect();
    let inside: f64 = (-max_l..=max_l).map(|l| per_harmonic[harmonic(l)]).sum();
    Ok(OamSpectrum { max_l, weights, residual: (total - inside) / total })
}

/// `|⟨LG_{p,l}|field⟩|²` for `p ≤ max_p`, `|l| ≤ max_l`, indexed `[p][l + max_l]`.
pub fn lg_decomposition(
    field: &ComplexField,
    center: (f64, f64),
    beam: &BeamParams,
    max_p: u32,
    max_l: i32,
) -> Result<Vec<Vec<f64>>> {
    (0..=max_p)
        .map(|p| {
            (-max_l..=max_l)
                .map(|l| {
                    let mode = lg_field(field.grid(), 0.0, ModeIndex::new(p, l), beam, center);
                    Ok(mode_overlap(&mode, field)?.norm_sqr())
                })
                .collect()
        })
        .collect()
}

/// The SLM as it acts inside a simulation: render a hologram on the field's
/// own grid, reflect, and keep the first diffraction order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlmPath {
    pub device: DeviceModel,
    /// Tilt added to every analyzer/transform hologram, rad/m.
    pub carrier: (f64, f64),
    /// Radius of the first-order filter, rad/m.
    pub filter_radius: f64,
}

impl SlmPath {
    /// Carrier along `x` at a quarter of the sampling frequency, filter
    /// radius half the carrier.
    pub fn for_grid(grid: &PhysicalGrid, device: DeviceModel) -> Self {
        let kx = PI / (2.0 * grid.pitch().0);
        Self { device, carrier: (kx, 0.0), filter_radius: kx / 2.0 }
    }

    pub fn hologram(&self, wavelength: f64, charge: i32, center: (f64, f64)) -> HologramSpec {
        // the z = 0 vortex phase does not depend on the waist
        let beam = BeamParams::new(1e-3, wavelength).expect("positive wavelength");
        HologramSpec::fork(beam, charge, center, self.carrier)
    }

    /// Reflects `field` off `spec` rendered on the field grid. A tilted
    /// hologram's first order is isolated and brought back on axis.
    pub fn apply(&self, field: &ComplexField, spec: &HologramSpec) -> Result<ComplexField> {
        spec.validate()?;
        let grid = field.grid();
        let image = render(spec, grid);
        let reflected = apply_hologram(field, &image, grid, &self.device, Placement::centered())?;
        if spec.grating == (0.0, 0.0) {
            return Ok(reflected);
        }
        isolate_order(&reflected, &OrderFilter::new(spec.grating, self.filter_radius)?)
    }

    pub fn transform(&self, field: &ComplexField, charge: i32, center: (f64, f64)) -> Result<ComplexField> {
        self.apply(field, &self.hologram(field.wavelength(), charge, center))
    }

    /// Largest |charge| whose LG_{0,l} spectrum (twice its rms radius) fits
    /// inside the first-order filter for a beam of waist `w0`.
    pub fn max_charge(&self, w0: f64) -> i32 {
        let s = self.filter_radius * w0 / 2.0;
        ((s * s / 2.0 - 1.0).floor() as i32).max(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    /// Charge of the analyzer hologram. It maps mode `−charge` onto `l = 0`.
    pub hologram_charge: i32,
    pub hologram_displacement: (f64, f64),
    /// Gaussian accepted by the single-mode fiber, referred to the hologram plane.
    pub fiber_mode: BeamParams,
}

impl AnalyzerSetting {
    pub fn centered(hologram_charge: i32, fiber_mode: BeamParams) -> Self {
        Self { hologram_charge, hologram_displacement: (0.0, 0.0), fiber_mode }
    }

    /// Setting that detects OAM index `l`.
    pub fn detecting(l: i32, fiber_mode: BeamParams) -> Self {
        Self::centered(-l, fiber_mode)
    }

    pub fn fiber_field(&self, grid: &PhysicalGrid) -> ComplexField {
        lg_field(grid, 0.0, ModeIndex::azimuthal(0), &self.fiber_mode, (0.0, 0.0))
    }
}

/// Coupling amplitude `⟨fiber | first order of (analyzer hologram · field)⟩`.
pub fn analyzer_amplitude(field: &ComplexField, setting: &AnalyzerSetting, path: &SlmPath) -> Result<Complex64> {
    let out = path.transform(field, setting.hologram_charge, setting.hologram_displacement)?;
    mode_overlap(&setting.fiber_field(field.grid()), &out)
}

/// Detection probabilities of transformed Gaussians on a set of analyzers.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    pub transform_charges: Vec<i32>,
    /// OAM index each analyzer detects.
    pub analyzer_modes: Vec<i32>,
    /// Row-normalized probabilities, `[transform][analyzer]`.
    pub probabilities: Vec<Vec<f64>>,
}

impl CrosstalkMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        self.probabilities.iter().enumerate().map(|(i, r)| r[i]).collect()
    }

    /// Smallest ratio of a row's diagonal entry to its largest off-diagonal entry.
    pub fn min_dominance(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let off = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).fold(0.0, f64::max);
                if off == 0.0 {
                    f64::INFINITY
                } else {
                    row[i] / off
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["l".to_string()];
        header.extend(self.analyzer_modes.iter().map(|l| l.to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for (l, row) in self.transform_charges.iter().zip(&self.probabilities) {
            let mut rec = vec![l.to_string()];
            rec.extend(row.iter().map(|v| format!("{v:.12e}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A Gaussian source, the SLM path and a single-mode fiber on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSorter {
    pub grid: PhysicalGrid,
    pub source: BeamParams,
    pub path: SlmPath,
    pub fiber: BeamParams,
}

impl ModeSorter {
    pub fn new(grid: PhysicalGrid, source: BeamParams, device: DeviceModel) -> Self {
        Self { grid, source, path: SlmPath::for_grid(&grid, device), fiber: source }
    }

    /// Reduced window at SLM pixel pitch: 256² samples, 0.45 mm waist, ideal
    /// device. `refinement` subdivides each pixel while keeping the window.
    pub fn desk(refinement: usize) -> Result<Self> {
        let n = crate::defaults::DESK_SAMPLES;
        let pitch = crate::defaults::slm_pitch().0;
        let grid = PhysicalGrid::square(n, pitch)?.refined(refinement)?;
        let source = BeamParams::new(crate::defaults::DESK_WAIST_M, crate::defaults::WAVELENGTH_M)?;
        Ok(Self::new(grid, source, DeviceModel::ideal()))
    }

    pub fn source_field(&self, l: i32) -> ComplexField {
        lg_field(&self.grid, 0.0, ModeIndex::azimuthal(l), &self.source, (0.0, 0.0))
    }

    fn check_band(&self, charges: &[i32]) -> Result<()> {
        let limit = self.path.max_charge(self.source.w0());
        match charges.iter().map(|c| c.abs()).max() {
            Some(c) if c > limit => Err(Error::Configuration(format!(
                "charge {c} exceeds the band limit of this grid; maximum charge is {limit}"
            ))),
            _ => Ok(()),
        }
    }

    /// Entry `(i, j)` is `|⟨fiber | analyzer(−j) · transform(i) · LG₀₀⟩|²`,
    /// normalized so each row sums to one.
    pub fn crosstalk_matrix(&self, transform_charges: &[i32], analyzer_modes: &[i32]) -> Result<CrosstalkMatrix> {
        self.check_band(transform_charges)?;
        self.check_band(analyzer_modes)?;
        let input = self.source_field(0);
        let prepared: Vec<ComplexField> =
            par::map_range(transform_charges.len(), |i| self.path.transform(&input, transform_charges[i], (0.0, 0.0)))
                .into_iter()
                .collect::<Result<_>>()?;
        let n_a = analyzer_modes.len();
        let raw: Vec<f64> = par::map_range(transform_charges.len() * n_a, |k| {
            let setting = AnalyzerSetting::detecting(analyzer_modes[k % n_a], self.fiber);
            analyzer_amplitude(&prepared[k / n_a], &setting, &self.path).map(|a| a.norm_sqr())
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let probabilities = raw
            .chunks(n_a)
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|v| if s > 0.0 { v / s } else { 0.0 }).collect()
            })
            .collect();
        Ok(CrosstalkMatrix {
            transform_charges: transform_charges.to_vec(),
            analyzer_modes: analyzer_modes.to_vec(),
            probabilities,
        })
    }

    /// Fiber waist maximizing the coupling of the untransformed source
    /// through the SLM path (golden-section search, 1e-3 relative).
    pub fn optimal_fiber(&self) -> Result<BeamParams> {
        let through = self.path.transform(&self.source_field(0), 0, (0.0, 0.0))?;
        let coupling = |w: f64| -> Result<f64> {
            let fiber = self.source.with_waist(w)?;
            let g = lg_field(&self.grid, 0.0, ModeIndex::azimuthal(0), &fiber, (0.0, 0.0));
            Ok(mode_overlap(&g, &through)?.norm_sqr())
        };
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.5 * self.source.w0(), 2.0 * self.source.w0());
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (coupling(c)?, coupling(d)?);
        while (b - a) > 1e-3 * (a + b) / 2.0 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = coupling(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = coupling(d)?;
            }
        }
        self.source.with_waist((a + b) / 2.0)
    }
}
