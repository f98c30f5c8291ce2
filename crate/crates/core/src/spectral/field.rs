use rustfft::num_complex::Complex64;

use super::grid::{Grid1D, Grid2D};
use crate::error::{Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Transposes a row-major `rows x cols` buffer into `out` (`cols x rows`).
pub(crate) fn transpose<T: Copy>(src: &[T], rows: usize, cols: usize, out: &mut [T]) {
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(out.len(), rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
}

/// In-place 2D transform of a row-major (ny x nx) buffer.
pub(crate) fn fft2(grid: &Grid2D, buf: &mut [Complex64], scratch: &mut [Complex64], forward: bool) {
    let (nx, ny) = (grid.nx(), grid.ny());
    if forward {
        grid.x().plans().forward(buf);
    } else {
        grid.x().plans().inverse(buf);
    }
    transpose(buf, ny, nx, scratch);
    if forward {
        grid.y().plans().forward(scratch);
    } else {
        grid.y().plans().inverse(scratch);
    }
    transpose(scratch, nx, ny, buf);
}

/// Real samples on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid1D) -> Self {
        Self {
            values: vec![0.0; grid.n()],
            grid: grid.clone(),
        }
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n()).map(|i| f(grid.point(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub(crate) fn from_raw(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Quadrature `∫ f dx`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    /// Quadrature L² norm.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    pub fn spectrum(&self) -> Spectrum1D {
        let mut coeffs = to_complex(&self.values);
        self.grid.plans().forward(&mut coeffs);
        Spectrum1D {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field1D, f: impl Fn(f64, f64) -> f64) -> Result<Field1D> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("1D fields on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field1D::new(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field1D> {
        Field1D::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, factor: f64) -> Field1D {
        Field1D::from_raw(
            self.grid.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

/// Unnormalized DFT coefficients of a 1D field, storage order of the grid.
#[derive(Debug, Clone)]
pub struct Spectrum1D {
    grid: Grid1D,
    coeffs: Vec<Complex64>,
}

impl Spectrum1D {
    pub fn new(grid: Grid1D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Zeroes every mode with `|j| > n/3`.
    pub fn dealias(mut self) -> Self {
        for (j, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.retained(j) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    /// Inverse transform, keeping the real part.
    pub fn to_field(&self) -> Result<Field1D> {
        let mut buf = self.coeffs.clone();
        self.grid.plans().inverse(&mut buf);
        let scale = 1.0 / self.grid.n() as f64;
        Field1D::new(self.grid.clone(), buf.iter().map(|c| c.re * scale).collect())
    }
}

/// Real samples on a [`Grid2D`], row-major in y.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            values: vec![0.0; grid.size()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(x, y)` at the grid points.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.size());
        for iy in 0..grid.ny() {
            let y = grid.y().point(iy);
            for ix in 0..grid.nx() {
                values.push(f(grid.x().point(ix), y));
            }
        }
        Self::new(grid.clone(), values)
    }

    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.size());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    /// The x-slice at row `iy`.
    pub fn row(&self, iy: usize) -> Result<&[f64]> {
        let ny = self.grid.ny();
        if iy >= ny {
            return Err(Error::IndexOutOfRange { index: iy, len: ny });
        }
        let nx = self.grid.nx();
        Ok(&self.values[iy * nx..(iy + 1) * nx])
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.grid.nx())
    }

    /// The x-slice at row `iy` as a 1D field on the x-axis grid.
    pub fn slice(&self, iy: usize) -> Result<Field1D> {
        Ok(Field1D::from_raw(self.grid.x().clone(), self.row(iy)?.to_vec()))
    }

    /// Broadcasts a 1D field along y.
    pub fn extrude(grid: &Grid2D, f: &Field1D) -> Result<Field2D> {
        if f.grid() != grid.x() {
            return Err(Error::GridMismatch("1D field does not live on the x-axis".into()));
        }
        let mut values = Vec::with_capacity(grid.size());
        for _ in 0..grid.ny() {
            values.extend_from_slice(f.values());
        }
        Ok(Field2D::from_raw(grid.clone(), values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Per-row x-means.
    pub fn x_means(&self) -> Vec<f64> {
        let nx = self.grid.nx() as f64;
        self.rows().map(|r| r.iter().sum::<f64>() / nx).collect()
    }

    /// Quadrature L² norm over the box.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.x().spacing() * self.grid.y().spacing();
        (self.values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }

    pub fn spectrum(&self) -> Spectrum2D {
        let mut coeffs = to_complex(&self.values);
        let mut scratch = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        fft2(&self.grid, &mut coeffs, &mut scratch, true);
        Spectrum2D {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn zip_with(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Result<Field2D> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("2D fields on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field2D::new(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field2D> {
        Field2D::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Unnormalized 2D DFT coefficients; `coeffs[m * nx + j]` is mode `(ξ_j, μ_m)`.
#[derive(Debug, Clone)]
pub struct Spectrum2D {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn new(grid: Grid2D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.size() {
            return Err(Error::GridMismatch("coefficient count".into()));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Zeroes modes outside the two-thirds band on either axis.
    pub fn dealias(mut self) -> Self {
        dealias_2d(&self.grid, &mut self.coeffs);
        self
    }

    /// Largest `|ĉ(-ξ,-μ) - conj(ĉ(ξ,μ))|`; zero for spectra of real fields.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut worst: f64 = 0.0;
        for m in 0..ny {
            let mm = (ny - m) % ny;
            for j in 0..nx {
                let jj = (nx - j) % nx;
                let a = self.coeffs[m * nx + j];
                let b = self.coeffs[mm * nx + jj];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    pub fn to_field(&self) -> Result<Field2D> {
        let mut buf = self.coeffs.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); buf.len()];
        fft2(&self.grid, &mut buf, &mut scratch, false);
        let scale = 1.0 / self.grid.size() as f64;
        Field2D::new(self.grid.clone(), buf.iter().map(|c| c.re * scale).collect())
    }
}

fn dealias_2d(grid: &Grid2D, coeffs: &mut [Complex64]) {
    let nx = grid.nx();
    let zero = Complex64::new(0.0, 0.0);
    for (m, row) in coeffs.chunks_exact_mut(nx).enumerate() {
        if !grid.y().retained(m) {
            row.fill(zero);
            continue;
        }
        for (j, c) in row.iter_mut().enumerate() {
            if !grid.x().retained(j) {
                *c = zero;
            }
        }
    }
}
