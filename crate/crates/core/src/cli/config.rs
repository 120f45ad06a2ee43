//! Run configuration: a JSON document with unit-suffixed keys. Every key is
//! optional and falls back to [`crate::defaults`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::{AnalyzerSetting, ModeSorter, SlmPath};
use crate::defaults as d;
use crate::entangle::{Arm, Coupler, ExperimentConfig, Normalization, SlmSetting, TwoPhotonState};
use crate::error::{Error, Result};
use crate::grid::PhysicalGrid;
use crate::hologram::{DeviceModel, HologramSpec, Placement};
use crate::lg::{BeamParams, ModeIndex};
use crate::propagation::{Kernel, PropagationPlan};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub slm: SlmConfig,
    pub grid: GridConfig,
    pub beam: BeamConfig,
    pub hologram: HologramConfig,
    pub device: DeviceConfig,
    pub propagation: PropagationConfig,
    pub analysis: AnalysisConfig,
    pub experiment: ExperimentBlock,
    pub efficiency: EfficiencyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlmConfig {
    pub columns: usize,
    pub rows: usize,
    pub width_m: f64,
    pub height_m: f64,
    /// Position of the SLM center in the simulation window.
    pub offset_x_m: f64,
    pub offset_y_m: f64,
}

impl Default for SlmConfig {
    fn default() -> Self {
        Self {
            columns: d::SLM_COLUMNS,
            rows: d::SLM_ROWS,
            width_m: d::SLM_WIDTH_M,
            height_m: d::SLM_HEIGHT_M,
            offset_x_m: 0.0,
            offset_y_m: 0.0,
        }
    }
}

/// Simulation window. Pitches default to the SLM pixel pitch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub pitch_x_m: Option<f64>,
    pub pitch_y_m: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nx: d::SLM_COLUMNS, ny: d::SLM_COLUMNS, pitch_x_m: None, pitch_y_m: None }
    }
}

/// Mode illuminating the SLM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamConfig {
    pub wavelength_nm: f64,
    pub waist_m: f64,
    pub p: u32,
    pub l: i32,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self { wavelength_nm: d::WAVELENGTH_M * 1e9, waist_m: d::SOURCE_WAIST_M, p: 0, l: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HologramConfig {
    pub l: i32,
    pub x0_m: f64,
    pub y0_m: f64,
    /// Waist and Rayleigh length of the LG phase term; default to the beam.
    pub waist_m: Option<f64>,
    pub rayleigh_length_m: Option<f64>,
    pub z_m: f64,
    /// `null` removes the lens term.
    pub lens_focal_mm: Option<f64>,
    pub lens_converging: bool,
    pub lens_x0_m: f64,
    pub lens_y0_m: f64,
    pub ast: f64,
    pub kx_rad_per_m: f64,
    /// Defaults to a quarter of the SLM row sampling frequency (4-pixel period).
    pub ky_rad_per_m: Option<f64>,
}

impl Default for HologramConfig {
    fn default() -> Self {
        Self {
            l: 0,
            x0_m: 0.0,
            y0_m: 0.0,
            waist_m: None,
            rayleigh_length_m: None,
            z_m: 0.0,
            lens_focal_mm: Some(d::F_SLM_MM),
            lens_converging: true,
            lens_x0_m: 0.0,
            lens_y0_m: 0.0,
            ast: 1.0,
            kx_rad_per_m: 0.0,
            ky_rad_per_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    pub max_phase_rad: f64,
    pub fill_factor: f64,
    pub reflectivity: f64,
    pub gray_levels: u16,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            max_phase_rad: d::MAX_PHASE_RAD,
            fill_factor: d::FILL_FACTOR,
            reflectivity: d::REFLECTIVITY,
            gray_levels: d::GRAY_LEVELS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    #[default]
    AngularSpectrum,
    Fresnel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    pub distance_m: f64,
    pub padding_factor: f64,
    pub kernel: KernelName,
    /// Keep only the first diffraction order before propagating.
    pub isolate_first_order: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            distance_m: d::F_SLM_MM / 1e3,
            padding_factor: 2.0,
            kernel: KernelName::AngularSpectrum,
            isolate_first_order: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub max_l: i32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { max_l: 12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    #[default]
    Qutrit,
    Product,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationName {
    #[default]
    Conditioned,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplerConfig {
    pub label: String,
    pub charge: i32,
    pub x0_m: f64,
    pub y0_m: f64,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        Self { label: String::new(), charge: 0, x0_m: 0.0, y0_m: 0.0 }
    }
}

fn coupler(label: &str, charge: i32) -> CouplerConfig {
    CouplerConfig { label: label.into(), charge, ..Default::default() }
}

/// Two-photon measurement on a reduced window at SLM pitch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentBlock {
    pub state: StateKind,
    /// Band limit and width for the Gaussian spectrum.
    pub state_max_l: i32,
    pub state_width: f64,
    pub samples: usize,
    pub waist_m: f64,
    /// Signal fiber waist over idler fiber waist.
    pub fiber_waist_ratio: f64,
    pub normalization: NormalizationName,
    /// Use the lossless 2π device instead of `device`.
    pub ideal_device: bool,
    pub signal_couplers: Vec<CouplerConfig>,
    pub idler_couplers: Vec<CouplerConfig>,
    /// SLM holograms applied to the idler photon, one table column each.
    pub slm_charges: Vec<i32>,
    /// Horizontal displacement per SLM setting; a single value applies to all.
    pub slm_x0_m: Vec<f64>,
    /// Mean pair number for seeded Poisson counts; `null` skips counts.
    pub counts_pairs: Option<f64>,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        Self {
            state: StateKind::Qutrit,
            state_max_l: 3,
            state_width: 1.5,
            samples: d::DESK_SAMPLES,
            waist_m: d::DESK_WAIST_M,
            fiber_waist_ratio: 1.0,
            normalization: NormalizationName::Conditioned,
            ideal_device: true,
            signal_couplers: vec![coupler("2", 0), coupler("3", -1)],
            idler_couplers: vec![coupler("5", 0), coupler("6", 1)],
            slm_charges: vec![-1, 0, 1],
            slm_x0_m: vec![0.0],
            counts_pairs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EfficiencyConfig {
    pub max_order: i64,
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        Self { max_order: 3 }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Configuration(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Configuration(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    /// Fills every optional value so the manifest shows what was used.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        let (px, py) = c.slm_pitch()?;
        c.grid.pitch_x_m.get_or_insert(px);
        c.grid.pitch_y_m.get_or_insert(py);
        c.hologram.waist_m.get_or_insert(c.beam.waist_m);
        let w = positive("hologram.waist_m", c.hologram.waist_m.unwrap_or_default())?;
        let lambda = c.wavelength()?;
        c.hologram.rayleigh_length_m.get_or_insert(PI * w * w / lambda);
        c.hologram.ky_rad_per_m.get_or_insert(PI / (2.0 * py));
        Ok(c)
    }

    pub fn wavelength(&self) -> Result<f64> {
        Ok(positive("beam.wavelength_nm", self.beam.wavelength_nm)? * 1e-9)
    }

    fn slm_pitch(&self) -> Result<(f64, f64)> {
        if self.slm.columns == 0 || self.slm.rows == 0 {
            return Err(Error::Configuration("slm.columns and slm.rows must be nonzero".into()));
        }
        Ok((
            positive("slm.width_m", self.slm.width_m)? / self.slm.columns as f64,
            positive("slm.height_m", self.slm.height_m)? / self.slm.rows as f64,
        ))
    }

    pub fn slm_grid(&self) -> Result<PhysicalGrid> {
        self.slm_pitch()?;
        PhysicalGrid::centered(self.slm.columns, self.slm.rows, self.slm.width_m, self.slm.height_m)
            .map_err(|e| Error::Configuration(e.to_string()))
    }

    pub fn placement(&self) -> Placement {
        Placement { offset: (self.slm.offset_x_m, self.slm.offset_y_m) }
    }

    pub fn sim_grid(&self) -> Result<PhysicalGrid> {
        let (spx, spy) = self.slm_pitch()?;
        let px = positive("grid.pitch_x_m", self.grid.pitch_x_m.unwrap_or(spx))?;
        let py = positive("grid.pitch_y_m", self.grid.pitch_y_m.unwrap_or(spy))?;
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return Err(Error::Configuration("grid.nx and grid.ny must be nonzero".into()));
        }
        PhysicalGrid::centered(self.grid.nx, self.grid.ny, self.grid.nx as f64 * px, self.grid.ny as f64 * py)
            .map_err(|e| Error::Configuration(e.to_string()))
    }

    pub fn beam(&self) -> Result<BeamParams> {
        BeamParams::new(positive("beam.waist_m", self.beam.waist_m)?, self.wavelength()?)
    }

    pub fn mode(&self) -> ModeIndex {
        ModeIndex::new(self.beam.p, self.beam.l)
    }

    pub fn hologram_spec(&self) -> Result<HologramSpec> {
        let r = self.resolved()?;
        let h = &r.hologram;
        let lambda = r.wavelength()?;
        let w = positive("hologram.waist_m", h.waist_m.unwrap_or_default())?;
        let zr = positive("hologram.rayleigh_length_m", h.rayleigh_length_m.unwrap_or_default())?;
        let spec = HologramSpec {
            l: h.l,
            singularity_center: (h.x0_m, h.y0_m),
            beam: BeamParams::raw(w, zr, lambda)?,
            z: h.z_m,
            lens_focal_mm: h.lens_focal_mm,
            lens_center: (h.lens_x0_m, h.lens_y0_m),
            ast: h.ast,
            grating: (h.kx_rad_per_m, h.ky_rad_per_m.unwrap_or_default()),
            wavelength: lambda,
            lens_converging: h.lens_converging,
        };
        spec.validate().map_err(|e| Error::Configuration(e.to_string()))?;
        Ok(spec)
    }

    pub fn device(&self) -> Result<DeviceModel> {
        let dv = DeviceModel {
            max_phase: self.device.max_phase_rad,
            fill_factor: self.device.fill_factor,
            reflectivity: self.device.reflectivity,
            gray_levels: self.device.gray_levels,
        };
        dv.validate().map_err(|e| Error::Configuration(e.to_string()))?;
        Ok(dv)
    }

    pub fn plan(&self) -> PropagationPlan {
        let kernel = match self.propagation.kernel {
            KernelName::AngularSpectrum => Kernel::AngularSpectrum,
            KernelName::Fresnel => Kernel::Fresnel,
        };
        PropagationPlan::new(self.propagation.distance_m)
            .with_kernel(kernel)
            .with_padding(self.propagation.padding_factor)
    }

    pub fn slm_settings(&self) -> Result<Vec<SlmSetting>> {
        let e = &self.experiment;
        let xs = &e.slm_x0_m;
        if xs.len() != 1 && xs.len() != e.slm_charges.len() {
            return Err(Error::Configuration(format!(
                "experiment.slm_x0_m needs 1 or {} values, got {}",
                e.slm_charges.len(),
                xs.len()
            )));
        }
        if e.slm_charges.is_empty() {
            return Err(Error::Configuration("experiment.slm_charges is empty".into()));
        }
        Ok(e.slm_charges
            .iter()
            .enumerate()
            .map(|(k, &charge)| SlmSetting { charge, displacement: (xs[if xs.len() == 1 { 0 } else { k }], 0.0) })
            .collect())
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let e = &self.experiment;
        if e.samples == 0 {
            return Err(Error::Configuration("experiment.samples must be nonzero".into()));
        }
        let (px, _) = self.slm_pitch()?;
        let grid = PhysicalGrid::square(e.samples, px)?;
        let source = BeamParams::new(positive("experiment.waist_m", e.waist_m)?, self.wavelength()?)?;
        let device = if e.ideal_device { DeviceModel::ideal() } else { self.device()? };
        let optics = ModeSorter { grid, source, path: SlmPath::for_grid(&grid, device), fiber: source };
        let arm = |list: &[CouplerConfig]| Arm {
            transforms: vec![],
            couplers: list
                .iter()
                .map(|c| {
                    Coupler::new(
                        c.label.clone(),
                        AnalyzerSetting {
                            hologram_charge: c.charge,
                            hologram_displacement: (c.x0_m, c.y0_m),
                            fiber_mode: source,
                        },
                    )
                })
                .collect(),
        };
        let state = match e.state {
            StateKind::Qutrit => TwoPhotonState::qutrit(),
            StateKind::Product => TwoPhotonState::product(),
            StateKind::Gaussian => TwoPhotonState::gaussian(e.state_max_l, e.state_width)
                .map_err(|err| Error::Configuration(err.to_string()))?,
        };
        let cfg = ExperimentConfig {
            optics,
            state,
            signal: arm(&e.signal_couplers),
            idler: arm(&e.idler_couplers),
            normalization: match e.normalization {
                NormalizationName::Conditioned => Normalization::Conditioned,
                NormalizationName::Raw => Normalization::Raw,
            },
        };
        cfg.validate()?;
        cfg.with_fiber_mismatch(positive("experiment.fiber_waist_ratio", e.fiber_waist_ratio)?)
    }
}

/// Sets `value` at a dotted `path` inside a JSON document, creating objects
/// along the way.
pub fn set_path(doc: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Configuration(format!("empty segment in key '{path}'")));
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Configuration(format!("'{}' is not an object", parts[..k].join("."))))?;
        if k + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| serde_json::json!({}));
    }
    Ok(())
}
