//! Row-major 2-D FFTs on top of `rustfft`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

pub struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    /// Unnormalized forward transform (`e^{-2πi·nk/N}` kernel).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform including the `1/(nx·ny)` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_inv, &self.col_inv);
        let s = 1.0 / (self.nx * self.ny) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    fn run(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.nx * self.ny);
        par::for_each_row(data, self.nx, |_, row| rows.process(row));
        let mut t = transpose(data, self.nx, self.ny);
        par::for_each_row(&mut t, self.ny, |_, col| cols.process(col));
        let back = transpose(&t, self.ny, self.nx);
        data.copy_from_slice(&back);
    }
}

fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    par::for_each_row(&mut out, ny, |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = data[j * nx + i];
        }
    });
    out
}

/// Angular spatial frequency (rad/m) of DFT bin `u` for `n` samples at `pitch`.
#[inline]
pub fn angular_frequency(u: usize, n: usize, pitch: f64) -> f64 {
    let signed = if u < n.div_ceil(2) { u as f64 } else { u as f64 - n as f64 };
    2.0 * PI * signed / (n as f64 * pitch)
}
