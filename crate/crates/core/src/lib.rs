//! Phase holograms on a spatial light modulator and the scalar optics needed
//! to follow light carrying orbital angular momentum through them.

pub mod analysis;
pub mod cli;
pub mod defaults;
pub mod entangle;
pub mod error;
pub mod export;
pub mod fft;
pub mod grid;
pub mod hologram;
pub mod lg;
mod par;
pub mod propagation;

pub use error::{Error, Result};
pub use grid::{ComplexField, PhysicalGrid};
pub use hologram::{DeviceModel, GrayImage, HologramSpec};
pub use lg::{BeamParams, ModeIndex};
