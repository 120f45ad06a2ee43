//! Sampling grids and complex scalar fields.
//!
//! Storage is row-major: pixel `(i, j)` lives at `values[j * nx + i]`, with
//! the column index `i` running along `x` and the row index `j` along `y`.
//! Both axes increase with their index. Coordinates refer to pixel centers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalGrid {
    nx: usize,
    ny: usize,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl PhysicalGrid {
    pub fn new(nx: usize, ny: usize, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Domain(format!("grid needs at least 2x2 pixels, got {nx}x{ny}")));
        }
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || y_max <= y_min {
            return Err(Error::Domain(format!("invalid grid extents x [{x_min}, {x_max}], y [{y_min}, {y_max}]")));
        }
        let grid = Self { nx, ny, x_min, x_max, y_min, y_max };
        let (px, py) = grid.pitch();
        if !(px.is_finite() && py.is_finite() && px > 0.0 && py > 0.0) {
            return Err(Error::Domain("grid pitch must be positive and finite".into()));
        }
        Ok(grid)
    }

    /// Grid of the given physical size centered on the origin.
    pub fn centered(nx: usize, ny: usize, width: f64, height: f64) -> Result<Self> {
        Self::new(nx, ny, -width / 2.0, width / 2.0, -height / 2.0, height / 2.0)
    }

    /// Square centered grid with `n` pixels of `pitch` on each side.
    pub fn square(n: usize, pitch: f64) -> Result<Self> {
        let w = n as f64 * pitch;
        Self::centered(n, n, w, w)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y_min, self.y_max)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// `(pitch_x, pitch_y)` in meters.
    pub fn pitch(&self) -> (f64, f64) {
        (self.width() / self.nx as f64, self.height() / self.ny as f64)
    }

    pub fn pixel_area(&self) -> f64 {
        let (px, py) = self.pitch();
        px * py
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.width() / self.nx as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (j as f64 + 0.5) * self.height() / self.ny as f64
    }

    /// Pixel-center coordinates of column `i`, row `j`.
    pub fn coordinates(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        if i >= self.nx || j >= self.ny {
            return Err(Error::Index { i, j, nx: self.nx, ny: self.ny });
        }
        Ok((self.x(i), self.y(j)))
    }

    /// Index of the pixel whose center is closest to `(x, y)`, if the point
    /// lies inside the grid window.
    pub fn nearest_index(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (px, py) = self.pitch();
        let fi = (x - self.x_min) / px;
        let fj = (y - self.y_min) / py;
        if !(0.0..self.nx as f64).contains(&fi) || !(0.0..self.ny as f64).contains(&fj) {
            return None;
        }
        Some((fi.floor() as usize, fj.floor() as usize))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Same window sampled with `factor` times as many pixels per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.nx * factor, self.ny * factor, self.x_min, self.x_max, self.y_min, self.y_max)
    }

    pub(crate) fn same_sampling(&self, other: &PhysicalGrid) -> bool {
        let tol = 1e-12 * self.width().max(self.height());
        self.nx == other.nx
            && self.ny == other.ny
            && (self.x_min - other.x_min).abs() <= tol
            && (self.x_max - other.x_max).abs() <= tol
            && (self.y_min - other.y_min).abs() <= tol
            && (self.y_max - other.y_max).abs() <= tol
    }
}

/// Monochromatic complex amplitude sampled on a [`PhysicalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: PhysicalGrid,
    values: Vec<Complex64>,
    wavelength: f64,
}

impl ComplexField {
    pub fn new(grid: PhysicalGrid, values: Vec<Complex64>, wavelength: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("{} values for a {}x{} grid", values.len(), grid.nx(), grid.ny())));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self { grid, values, wavelength })
    }

    pub fn zeros(grid: PhysicalGrid, wavelength: f64) -> Result<Self> {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.len()], wavelength)
    }

    /// Samples `f(x, y)` at every pixel center.
    pub fn from_fn<F>(grid: PhysicalGrid, wavelength: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync + Send,
    {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        par::for_each_row(&mut values, grid.nx(), |j, row| {
            let y = grid.y(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(grid.x(i), y);
            }
        });
        Self::new(grid, values, wavelength)
    }

    pub fn grid(&self) -> &PhysicalGrid {
        &self.grid
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.grid.nx() + i]
    }

    /// Multiplies every sample by `f(x, y)`.
    pub fn modulate<F>(&mut self, f: F)
    where
        F: Fn(f64, f64) -> Complex64 + Sync + Send,
    {
        let grid = self.grid;
        par::for_each_row(&mut self.values, grid.nx(), |j, row| {
            let y = grid.y(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v *= f(grid.x(i), y);
            }
        });
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Intensity-weighted mean position `(x, y)`.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let g = self.grid;
        let w = g.nx();
        let total = par::row_sum(&self.values, w, |_, row| row.iter().map(|v| v.norm_sqr()).sum());
        if total <= 0.0 {
            return None;
        }
        let sx =
            par::row_sum(&self.values, w, |_, row| row.iter().enumerate().map(|(i, v)| v.norm_sqr() * g.x(i)).sum());
        let sy = par::row_sum(&self.values, w, |j, row| row.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.y(j));
        Some((sx / total, sy / total))
    }

    /// Second-moment (D4σ) beam radius `(w_x, w_y)`; equals the 1/e² radius
    /// for a Gaussian.
    pub fn second_moment_radius(&self) -> Option<(f64, f64)> {
        let (cx, cy) = self.centroid()?;
        let g = self.grid;
        let w = g.nx();
        let total = par::row_sum(&self.values, w, |_, row| row.iter().map(|v| v.norm_sqr()).sum());
        let vx = par::row_sum(&self.values, w, |_, row| {
            row.iter().enumerate().map(|(i, v)| v.norm_sqr() * (g.x(i) - cx).powi(2)).sum()
        });
        let vy = par::row_sum(&self.values, w, |j, row| {
            row.iter().map(|v| v.norm_sqr()).sum::<f64>() * (g.y(j) - cy).powi(2)
        });
        Some((2.0 * (vx / total).sqrt(), 2.0 * (vy / total).sqrt()))
    }
}

/// Midpoint Riemann sum of |field|² over the grid.
pub fn total_power(field: &ComplexField) -> f64 {
    let sum = par::row_sum(field.values(), field.grid().nx(), |_, row| row.iter().map(|v| v.norm_sqr()).sum());
    sum * field.grid().pixel_area()
}

pub fn normalize(field: &ComplexField) -> Result<ComplexField> {
    let p = total_power(field);
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::DegenerateInput(format!("cannot normalize a field with power {p}")));
    }
    Ok(field.scaled(Complex64::new(1.0 / p.sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn signed_range_grid() -> PhysicalGrid {
        PhysicalGrid::new(1024, 768, -0.0098, 0.0098, -0.0073, 0.0073).unwrap()
    }

    #[test]
    fn center_column_is_near_zero() {
        let g = signed_range_grid();
        let (x, _) = g.coordinates(512, 0).unwrap();
        assert!(x.abs() <= g.pitch().0);
    }

    #[test]
    fn edge_pixels_use_center_convention() {
        let g = signed_range_grid();
        let (px, py) = g.pitch();
        let (x0, y0) = g.coordinates(0, 0).unwrap();
        assert!((x0 - (-0.0098 + px / 2.0)).abs() < 1e-15);
        assert!((y0 - (-0.0073 + py / 2.0)).abs() < 1e-15);
        let (x1, _) = g.coordinates(1023, 0).unwrap();
        assert!((x1 - (0.0098 - px / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let g = signed_range_grid();
        assert!(matches!(g.coordinates(1024, 0), Err(Error::Index { .. })));
        assert!(matches!(g.coordinates(0, 768), Err(Error::Index { .. })));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PhysicalGrid::new(1, 4, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(PhysicalGrid::new(4, 4, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(PhysicalGrid::new(4, 4, 0.0, 1.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn zero_field_has_zero_power() {
        let f = ComplexField::zeros(PhysicalGrid::square(16, 1e-5).unwrap(), 7e-7).unwrap();
        assert_eq!(total_power(&f), 0.0);
        assert!(matches!(normalize(&f), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn unit_amplitude_power_is_area() {
        let g = PhysicalGrid::centered(32, 20, 3e-3, 2e-3).unwrap();
        let f = ComplexField::from_fn(g, 7e-7, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!((total_power(&f) - 6e-6).abs() < 1e-18);
    }

    #[test]
    fn normalize_power_four_halves_values() {
        let g = PhysicalGrid::square(8, 0.25).unwrap(); // area 4
        let f = ComplexField::from_fn(g, 1e-6, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!((total_power(&f) - 4.0).abs() < 1e-12);
        let n = normalize(&f).unwrap();
        assert!((total_power(&n) - 1.0).abs() < 1e-12);
        assert!((n.get(3, 3).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn values_length_checked() {
        let g = PhysicalGrid::square(4, 1.0).unwrap();
        assert!(matches!(ComplexField::new(g, vec![Complex64::new(0.0, 0.0); 15], 1.0), Err(Error::Shape(_))));
    }

    proptest! {
        #[test]
        fn index_coordinate_round_trip(nx in 2usize..300, ny in 2usize..300, i in 0usize..300, j in 0usize..300,
                                       x0 in -1.0f64..1.0, w in 1e-4f64..2.0, h in 1e-4f64..2.0) {
            let g = PhysicalGrid::new(nx, ny, x0, x0 + w, -h, 0.0).unwrap();
            let (i, j) = (i % nx, j % ny);
            let (x, y) = g.coordinates(i, j).unwrap();
            prop_assert_eq!(g.nearest_index(x, y), Some((i, j)));
            if i + 1 < nx {
                prop_assert!(g.x(i + 1) > x);
            }
        }

        #[test]
        fn power_invariant_under_global_phase(phi in -10.0f64..10.0, seed in 0u64..1000) {
            let g = PhysicalGrid::square(12, 1e-3).unwrap();
            let s = seed as f64;
            let f = ComplexField::from_fn(g, 7e-7, |x, y| {
                Complex64::new((x * 1e3 + s).sin(), (y * 2e3 - s).cos())
            }).unwrap();
            let rotated = f.scaled(Complex64::from_polar(1.0, phi));
            let (a, b) = (total_power(&f), total_power(&rotated));
            prop_assert!((a - b).abs() <= 1e-13 * a);
        }

        #[test]
        fn normalize_is_idempotent(scale in 1e-3f64..1e3) {
            let g = PhysicalGrid::square(10, 1e-4).unwrap();
            let f = ComplexField::from_fn(g, 7e-7, |x, y| Complex64::new(scale * (1.0 + x * 1e3), y * 1e4)).unwrap();
            let once = normalize(&f).unwrap();
            let twice = normalize(&once).unwrap();
            for (a, b) in once.values().iter().zip(twice.values()) {
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300) + 1e-300);
            }
        }
    }
}
