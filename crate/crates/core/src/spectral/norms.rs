//! Discrete Sobolev-type norms.
//!
//! Every norm is the Parseval image of a quadrature integral: with
//! unnormalized DFT coefficients `ĉ`, the 1D sum carries the factor
//! `L / n²` and the 2D sum `Lx Ly / (nx ny)²`, so that the zero-order norm
//! equals the Riemann-sum L² norm of the samples exactly.

use rustfft::num_complex::Complex64;

use super::field::{Field1D, Field2D};
use super::grid::Grid1D;
use super::ops::MeanTolerance;
use crate::error::{Error, Result};

fn hk_weight(xi: f64, k: u32) -> f64 {
    (1.0 + xi * xi).powi(k as i32)
}

fn weighted_sum_1d(grid: &Grid1D, coeffs: &[Complex64], k: u32) -> f64 {
    coeffs
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, &xi)| hk_weight(xi, k) * c.norm_sqr())
        .sum()
}

/// `‖f‖_{H^k}` of a 1D field.
pub fn hk_norm_1d(f: &Field1D, k: u32) -> f64 {
    let g = f.grid();
    let spec = f.spectrum();
    let n = g.n() as f64;
    (g.length() / (n * n) * weighted_sum_1d(g, spec.coeffs(), k)).sqrt()
}

/// `‖f(·, y_index)‖_{H^k_x}`.
pub fn hk_x_slice_norm(f: &Field2D, y_index: usize, k: u32) -> Result<f64> {
    Ok(hk_norm_1d(&f.slice(y_index)?, k))
}

/// `‖f(·, y)‖_{H^k_x}` for every row, using one batched transform.
pub fn hk_x_profile(f: &Field2D, k: u32) -> Vec<f64> {
    let g = f.grid().x();
    let n = g.n();
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    g.plans().forward(&mut buf);
    let scale = g.length() / (n as f64 * n as f64);
    buf.chunks_exact(n)
        .map(|row| (scale * weighted_sum_1d(g, row, k)).sqrt())
        .collect()
}

fn check_nonnegative(s: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Sobolev index must be finite and >= 0, got {s}"
        )));
    }
    Ok(())
}

fn weighted_sum_2d(f: &Field2D, weight: impl Fn(usize, usize) -> f64) -> f64 {
    let g = f.grid();
    let spec = f.spectrum();
    let nx = g.nx();
    let total: f64 = spec
        .coeffs()
        .chunks_exact(nx)
        .enumerate()
        .map(|(m, row)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| weight(j, m) * c.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    let size = g.size() as f64;
    g.lx() * g.ly() / (size * size) * total
}

/// `‖f‖_{H^s}` over the box, weight `(1 + ξ² + μ²)^s`.
pub fn hs_norm_2d(f: &Field2D, s: f64) -> Result<f64> {
    check_nonnegative(s)?;
    let (xi, mu) = (f.grid().x().wavenumbers(), f.grid().y().wavenumbers());
    Ok(weighted_sum_2d(f, |j, m| (1.0 + xi[j] * xi[j] + mu[m] * mu[m]).powf(s)).sqrt())
}

/// `‖f‖_{H^s_{-1}}`, weight `(1 + |ξ|^{-1})² (1 + ξ² + μ²)^s` on `ξ ≠ 0`.
///
/// The weight is infinite on the `ξ = 0` column, so every row must have
/// vanishing x-mean.
pub fn hs_minus1_norm(f: &Field2D, s: f64) -> Result<f64> {
    hs_minus1_norm_with(f, s, MeanTolerance::default())
}

pub fn hs_minus1_norm_with(f: &Field2D, s: f64, tol: MeanTolerance) -> Result<f64> {
    check_nonnegative(s)?;
    let limit = tol.absolute_for(f.max_abs());
    for (row, mean) in f.x_means().into_iter().enumerate() {
        if mean.abs() > limit {
            return Err(Error::NonZeroXMean { row, mean });
        }
    }
    let (xi, mu) = (f.grid().x().wavenumbers(), f.grid().y().wavenumbers());
    Ok(weighted_sum_2d(f, |j, m| {
        if j == 0 {
            return 0.0;
        }
        let low = 1.0 + 1.0 / xi[j].abs();
        low * low * (1.0 + xi[j] * xi[j] + mu[m] * mu[m]).powf(s)
    })
    .sqrt())
}

/// The five-term norm `‖ψ‖ + ‖ψ_x‖ + ‖ψ_xx‖ + ‖∂_x^{-1}∂_y ψ‖ + ‖ψ_y‖`.
pub fn w1_norm(f: &Field2D) -> Result<f64> {
    let dy = f.deriv_y(1);
    let nonlocal = dy.antideriv_x()?;
    Ok(f.l2_norm() + f.deriv_x(1).l2_norm() + f.deriv_x(2).l2_norm() + nonlocal.l2_norm() + dy.l2_norm())
}
