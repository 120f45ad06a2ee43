//! Physical constants of the reference setup, gathered in one place.
//!
//! Every configuration default in the CLI resolves to a value here.

use std::f64::consts::PI;

/// Down-converted photon wavelength.
pub const WAVELENGTH_M: f64 = 702e-9;

pub const SLM_COLUMNS: usize = 1024;
pub const SLM_ROWS: usize = 768;
pub const SLM_WIDTH_M: f64 = 19.5e-3;
pub const SLM_HEIGHT_M: f64 = 14.6e-3;

/// Signal arm coupling lens.
pub const F1_MM: f64 = 250.0;
/// Idler beam expander.
pub const F2_MM: f64 = -30.0;
pub const F3_MM: f64 = 100.0;
/// Relay onto the idler couplers.
pub const F4_MM: f64 = 750.0;

/// Lens term for the mode-matching configuration.
pub const F_SLM_MM: f64 = 940.0;
/// Lens term and tilt used for the higher-order mode pictures.
pub const F_SLM_PICTURES_MM: f64 = 131.0;
pub const KY_PICTURES_RAD_PER_M: f64 = 2e4;
/// Astigmatism weight that produced clean LG modes under oblique incidence.
pub const AST_OBLIQUE: f64 = 1.029;

pub const MAX_PHASE_RAD: f64 = 1.8 * PI;
pub const FILL_FACTOR: f64 = 0.90;
pub const REFLECTIVITY: f64 = 0.75;
pub const GRAY_LEVELS: u16 = 256;

/// Beam waist illuminating the SLM in the CLI beam recipe.
pub const SOURCE_WAIST_M: f64 = 1.5e-3;

/// Beam waist for the reduced-window simulations (mode sorting, correlations).
pub const DESK_WAIST_M: f64 = 0.45e-3;
/// Samples per side of the reduced window at SLM pixel pitch.
pub const DESK_SAMPLES: usize = 256;

pub fn slm_pitch() -> (f64, f64) {
    (SLM_WIDTH_M / SLM_COLUMNS as f64, SLM_HEIGHT_M / SLM_ROWS as f64)
}
