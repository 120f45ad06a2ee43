//! Byte-exact image encoders and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::hologram::GrayImage;

/// Binary PGM (`P5`, maxval 255), top row first.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

/// 8-bit grayscale PNG with default compression.
pub fn encode_png(image: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(image.data()).map_err(png_err)?;
        w.finish().map_err(png_err)?;
    }
    Ok(out)
}

fn png_err(e: png::EncodingError) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Intensity scaled linearly so the brightest sample is 255; the row at
/// `y_max` comes first.
pub fn intensity_image(field: &ComplexField) -> GrayImage {
    let g = field.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let intensity = field.intensity();
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    let mut data = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let j = ny - 1 - row;
        data.extend(intensity[j * nx..(j + 1) * nx].iter().map(|v| (v * scale).round().clamp(0.0, 255.0) as u8));
    }
    GrayImage::new(nx, ny, data).expect("dimensions match the field")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Writes files into one directory and remembers their hashes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    records: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), records: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<FileRecord> {
        fs::write(self.root.join(name), bytes)?;
        let rec = FileRecord { name: name.to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) };
        self.records.push(rec.clone());
        Ok(rec)
    }

    pub fn records(&self) -> &[FileRecord] {
        &self.records
    }

    /// Hash over the names and hashes of every file written so far, in order.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for r in &self.records {
            h.update(r.name.as_bytes());
            h.update([0u8]);
            h.update(r.sha256.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}
