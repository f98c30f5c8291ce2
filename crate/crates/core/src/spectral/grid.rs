use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Forward/inverse plans for one transform length.
pub(crate) struct FftPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized forward transform of every contiguous chunk of length n.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse transform of every contiguous chunk of length n.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

/// Signed DFT index of storage slot `j` on an `n`-point grid.
///
/// Slot `n/2` (Nyquist) maps to `-n/2`.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if 2 * j < n {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Uniform periodic grid on `[-L/2, L/2)` with its DFT wavenumbers.
#[derive(Clone)]
pub struct Grid1D {
    n: usize,
    length: f64,
    spacing: f64,
    wavenumbers: Arc<[f64]>,
    plans: Arc<FftPlans>,
}

impl Grid1D {
    /// Requires `n` even, `n >= 8` and `length > 0`.
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "sample count must be even and >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let wavenumbers: Arc<[f64]> = (0..n)
            .map(|j| TAU * signed_index(j, n) as f64 / length)
            .collect();
        Ok(Self {
            n,
            length,
            spacing: length / n as f64,
            wavenumbers,
            plans: Arc::new(FftPlans::new(n)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `ξ_j = 2π j / L` in storage order (zero mode at slot 0).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Coordinate of sample `i`.
    pub fn point(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Signed distance from `x0` to `x`, wrapped into `[-L/2, L/2)`.
    pub fn periodic_distance(&self, x: f64, x0: f64) -> f64 {
        let l = self.length;
        (x - x0 + 0.5 * l).rem_euclid(l) - 0.5 * l
    }

    /// True when storage slot `j` survives the two-thirds truncation.
    pub fn retained(&self, j: usize) -> bool {
        3 * signed_index(j, self.n).unsigned_abs() as usize <= self.n
    }

    pub(crate) fn plans(&self) -> &FftPlans {
        &self.plans
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

/// Tensor product of two periodic grids; samples are stored row-major in y,
/// i.e. sample `(ix, iy)` lives at `iy * nx + ix`.
#[derive(Clone, PartialEq)]
pub struct Grid2D {
    x: Grid1D,
    y: Grid1D,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Ok(Self {
            x: Grid1D::new(nx, lx)?,
            y: Grid1D::new(ny, ly)?,
        })
    }

    pub fn from_axes(x: Grid1D, y: Grid1D) -> Self {
        Self { x, y }
    }

    pub fn x(&self) -> &Grid1D {
        &self.x
    }

    pub fn y(&self) -> &Grid1D {
        &self.y
    }

    pub fn nx(&self) -> usize {
        self.x.n
    }

    pub fn ny(&self) -> usize {
        self.y.n
    }

    pub fn lx(&self) -> f64 {
        self.x.length
    }

    pub fn ly(&self) -> f64 {
        self.y.length
    }

    /// Total number of samples `nx * ny`.
    pub fn size(&self) -> usize {
        self.x.n * self.y.n
    }

    /// Storage index of the `ξ = 0` column within each row.
    pub const ZERO_XI: usize = 0;

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.x.n + ix
    }
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("nx", &self.x.n)
            .field("ny", &self.y.n)
            .field("lx", &self.x.length)
            .field("ly", &self.y.length)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wavenumbers_on_unit_circle() {
        let g = Grid1D::new(8, TAU).unwrap();
        assert_eq!(
            g.wavenumbers(),
            &[0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]
        );
        assert_eq!(g.wavenumbers()[0], 0.0);
    }

    #[test]
    fn wavenumbers_scale_with_length() {
        let g = Grid1D::new(8, PI).unwrap();
        let expected = [0.0, 2.0, 4.0, 6.0, -8.0, -6.0, -4.0, -2.0];
        for (a, b) in g.wavenumbers().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(Grid1D::new(7, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid1D::new(6, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid1D::new(8, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid1D::new(8, -2.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn spacing_times_n_is_length() {
        for &(n, l) in &[(8, 1.0), (256, 64.0), (96, 10.3)] {
            let g = Grid1D::new(n, l).unwrap();
            assert!((g.spacing() * n as f64 - l).abs() <= 4.0 * f64::EPSILON * l);
            assert_eq!(g.wavenumbers().len(), n);
        }
    }

    #[test]
    fn retained_modes_follow_two_thirds_rule() {
        let g = Grid1D::new(32, 1.0).unwrap();
        let kept = (0..32).filter(|&j| g.retained(j)).count();
        assert_eq!(kept, 21);
        assert!(g.retained(8));
        assert!(!g.retained(15));
    }

    #[test]
    fn periodic_distance_wraps() {
        let g = Grid1D::new(8, 10.0).unwrap();
        assert!((g.periodic_distance(4.0, -4.0) - (-2.0)).abs() < 1e-14);
        assert!((g.periodic_distance(1.0, 0.5) - 0.5).abs() < 1e-14);
    }
}
