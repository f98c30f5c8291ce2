//! Spectral differentiation and the singular antiderivative `∂_x^{-1}`.
//!
//! All operators act along one axis by multiplying DFT coefficients with a
//! symbol. Odd symbols vanish on the Nyquist mode, which has no partner of
//! opposite sign; this keeps the output real.

use rustfft::num_complex::Complex64;

use super::field::{transpose, Field1D, Field2D};
use super::grid::Grid1D;
use crate::error::{Error, Result};

/// Relative factor of the zero-mean precondition of `∂_x^{-1}`.
pub const DEFAULT_MEAN_TOL: f64 = 1e-10;

/// Tolerance on per-row x-means: `relative * max(1, ‖f‖_∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanTolerance {
    pub relative: f64,
}

impl Default for MeanTolerance {
    fn default() -> Self {
        Self {
            relative: DEFAULT_MEAN_TOL,
        }
    }
}

impl MeanTolerance {
    pub fn absolute_for(&self, max_abs: f64) -> f64 {
        self.relative * max_abs.max(1.0)
    }
}

/// `(iξ)^order`, zero on the Nyquist mode for odd orders.
fn derivative_symbol(grid: &Grid1D, j: usize, order: u32) -> Complex64 {
    if order % 2 == 1 && j == grid.nyquist_index() {
        return Complex64::new(0.0, 0.0);
    }
    let xi = grid.wavenumbers()[j];
    Complex64::new(0.0, xi).powu(order)
}

/// `1/(iξ)` off the zero and Nyquist modes, zero on them.
fn antiderivative_symbol(grid: &Grid1D, j: usize) -> Complex64 {
    if j == 0 || j == grid.nyquist_index() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, -1.0 / grid.wavenumbers()[j])
}

/// Applies an x-symbol to each contiguous row of `values`.
fn apply_rows(grid: &Grid1D, values: &[f64], symbol: impl Fn(usize) -> Complex64) -> Vec<f64> {
    let n = grid.n();
    let table: Vec<Complex64> = (0..n).map(symbol).collect();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.plans().forward(&mut buf);
    for row in buf.chunks_exact_mut(n) {
        for (c, s) in row.iter_mut().zip(&table) {
            *c *= s;
        }
    }
    grid.plans().inverse(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

fn check_x_means(rows: std::slice::ChunksExact<'_, f64>, max_abs: f64, tol: MeanTolerance) -> Result<()> {
    let limit = tol.absolute_for(max_abs);
    for (row, slice) in rows.enumerate() {
        let mean = slice.iter().sum::<f64>() / slice.len() as f64;
        if mean.abs() > limit {
            return Err(Error::NonZeroXMean { row, mean });
        }
    }
    Ok(())
}

impl Field1D {
    /// `∂_x^order f`.
    pub fn deriv_x(&self, order: u32) -> Field1D {
        let g = self.grid();
        Field1D::from_raw(
            g.clone(),
            apply_rows(g, self.values(), |j| derivative_symbol(g, j, order)),
        )
    }

    /// Zero-mean antiderivative; fails with `NonZeroXMean` when `∫ f dx ≠ 0`.
    pub fn antideriv_x(&self) -> Result<Field1D> {
        self.antideriv_x_with(MeanTolerance::default())
    }

    pub fn antideriv_x_with(&self, tol: MeanTolerance) -> Result<Field1D> {
        check_x_means(self.values().chunks_exact(self.grid().n()), self.max_abs(), tol)?;
        let g = self.grid();
        Ok(Field1D::from_raw(
            g.clone(),
            apply_rows(g, self.values(), |j| antiderivative_symbol(g, j)),
        ))
    }
}

impl Field2D {
    /// `∂_x^order f`, row by row.
    pub fn deriv_x(&self, order: u32) -> Field2D {
        let g = self.grid().x();
        Field2D::from_raw(
            self.grid().clone(),
            apply_rows(g, self.values(), |j| derivative_symbol(g, j, order)),
        )
    }

    /// `∂_y^order f`, column by column.
    pub fn deriv_y(&self, order: u32) -> Field2D {
        let (nx, ny) = (self.grid().nx(), self.grid().ny());
        let gy = self.grid().y();
        let mut cols = vec![0.0; self.values().len()];
        transpose(self.values(), ny, nx, &mut cols);
        let cols = apply_rows(gy, &cols, |m| derivative_symbol(gy, m, order));
        let mut out = vec![0.0; cols.len()];
        transpose(&cols, nx, ny, &mut out);
        Field2D::from_raw(self.grid().clone(), out)
    }

    /// Two-thirds truncation along x only, row by row.
    pub fn dealias_x(&self) -> Field2D {
        let g = self.grid().x();
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Field2D::from_raw(
            self.grid().clone(),
            apply_rows(g, self.values(), |j| if g.retained(j) { one } else { zero }),
        )
    }

    /// Row-wise zero-mean antiderivative in x.
    ///
    /// Every row must have x-mean below the tolerance, otherwise the
    /// result is undefined and `NonZeroXMean` names the first offending row.
    pub fn antideriv_x(&self) -> Result<Field2D> {
        self.antideriv_x_with(MeanTolerance::default())
    }

    pub fn antideriv_x_with(&self, tol: MeanTolerance) -> Result<Field2D> {
        check_x_means(self.rows(), self.max_abs(), tol)?;
        let g = self.grid().x();
        Ok(Field2D::from_raw(
            self.grid().clone(),
            apply_rows(g, self.values(), |j| antiderivative_symbol(g, j)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;
    use std::f64::consts::TAU;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn first_derivative_of_sine() {
        let l = 7.5;
        let g = Grid1D::new(64, l).unwrap();
        let k = TAU / l;
        let f = Field1D::from_fn(&g, |x| (k * x).sin()).unwrap();
        let exact = Field1D::from_fn(&g, |x| k * (k * x).cos()).unwrap();
        assert!(max_err(f.deriv_x(1).values(), exact.values()) <= 1e-12);
    }

    #[test]
    fn second_derivative_of_sine() {
        let l = 7.5;
        let g = Grid1D::new(64, l).unwrap();
        let k = TAU / l;
        let f = Field1D::from_fn(&g, |x| (k * x).sin()).unwrap();
        let exact = Field1D::from_fn(&g, |x| -k * k * (k * x).sin()).unwrap();
        assert!(max_err(f.deriv_x(2).values(), exact.values()) <= 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid1D::new(16, 3.0).unwrap();
        let f = Field1D::from_fn(&g, |_| 2.5).unwrap();
        assert!(f.deriv_x(1).max_abs() <= 1e-14);
    }

    #[test]
    fn nyquist_mode_is_killed_by_odd_derivatives() {
        let g = Grid1D::new(8, TAU).unwrap();
        // cos(4x) on 8 points is the pure Nyquist mode (-1)^i.
        let f = Field1D::from_fn(&g, |x| (4.0 * x).cos()).unwrap();
        assert!(f.deriv_x(1).max_abs() < 1e-14);
        assert!(f.antideriv_x().unwrap().max_abs() < 1e-14);
        assert!((f.deriv_x(2).max_abs() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn antiderivative_of_cosine() {
        let l = 12.0;
        let g = Grid1D::new(32, l).unwrap();
        let k = TAU / l;
        let f = Field1D::from_fn(&g, |x| (k * x).cos()).unwrap();
        let exact = Field1D::from_fn(&g, |x| (k * x).sin() / k).unwrap();
        assert!(max_err(f.antideriv_x().unwrap().values(), exact.values()) < 1e-12);
    }

    #[test]
    fn antiderivative_of_zero_is_zero() {
        let g = Grid1D::new(16, 1.0).unwrap();
        assert_eq!(Field1D::zeros(&g).antideriv_x().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn antiderivative_rejects_constant() {
        let g = Grid1D::new(16, 1.0).unwrap();
        let f = Field1D::from_fn(&g, |_| 1.0).unwrap();
        assert!(matches!(
            f.antideriv_x(),
            Err(Error::NonZeroXMean { row: 0, .. })
        ));
    }

    #[test]
    fn antiderivative_2d_reports_offending_row() {
        let g = Grid2D::new(16, 8, TAU, TAU).unwrap();
        let f = Field2D::from_fn(&g, |x, y| x.sin() + if y > 2.0 { 1.0 } else { 0.0 }).unwrap();
        match f.antideriv_x() {
            Err(Error::NonZeroXMean { row, mean }) => {
                assert!(g.y().point(row) > 2.0);
                assert!((mean - 1.0).abs() < 1e-12);
            }
            other => panic!("expected NonZeroXMean, got {other:?}"),
        }
    }

    #[test]
    fn y_derivative_matches_closed_form() {
        let (lx, ly) = (5.0, 9.0);
        let g = Grid2D::new(16, 32, lx, ly).unwrap();
        let (kx, ky) = (TAU / lx, 2.0 * TAU / ly);
        let f = Field2D::from_fn(&g, |x, y| (kx * x).sin() * (ky * y).cos()).unwrap();
        let exact =
            Field2D::from_fn(&g, |x, y| -ky * ky * (kx * x).sin() * (ky * y).cos()).unwrap();
        assert!(max_err(f.deriv_y(2).values(), exact.values()) < 1e-11);
    }
}
