//! The BBM-KP equation `(η_t + η_x + η η_x - η_xxt)_x + γ η_yy = 0`.
//!
//! After inverting `∂_x` and `1 - ∂_x²` the evolution reads, for `ξ ≠ 0`,
//!
//! ```text
//! η̂_t = [ -iξ (η̂ + ½ (η²)^) - iγ (μ²/ξ) η̂ ] / (1 + ξ²)
//! ```
//!
//! The `ξ = 0` column of the right-hand side is identically zero, so the
//! x-mean of every slice is frozen and `∂_x^{-1}` stays defined.

use std::fmt;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bbm::default_dealias;
use crate::error::{Error, Result};
use crate::spectral::{fft2, Field2D, Grid2D, MeanTolerance};
use crate::stepping::{integrate, SpectralSystem, TimeGrid};

/// Limit on `dt · max|symbol|`, inside the RK4 imaginary-axis interval (≈ 2.83).
pub const STABILITY_LIMIT: f64 = 2.5;

/// Sign of the transverse term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Gamma {
    Plus,
    Minus,
}

impl Gamma {
    pub fn value(self) -> f64 {
        match self {
            Gamma::Plus => 1.0,
            Gamma::Minus => -1.0,
        }
    }
}

impl TryFrom<i64> for Gamma {
    type Error = String;

    fn try_from(v: i64) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Gamma::Plus),
            -1 => Ok(Gamma::Minus),
            other => Err(format!("gamma must be +1 or -1, got {other}")),
        }
    }
}

impl From<Gamma> for i64 {
    fn from(g: Gamma) -> i64 {
        g.value() as i64
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value() as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BbmKpConfig {
    pub gamma: Gamma,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    #[serde(default = "default_dealias")]
    pub dealias: bool,
}

impl BbmKpConfig {
    pub fn new(gamma: Gamma, dt: f64, t_end: f64, snapshot_stride: usize) -> Self {
        Self {
            gamma,
            dt,
            t_end,
            snapshot_stride,
            dealias: true,
        }
    }

    /// Checks the step against the linear stability guard on `grid`.
    pub fn validate(&self, grid: &Grid2D) -> Result<TimeGrid> {
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidConfig("snapshot_stride must be >= 1".into()));
        }
        let times = TimeGrid::new(self.dt, self.t_end)?;
        let product = times.step * max_linear_symbol(grid, self.gamma);
        if product > STABILITY_LIMIT {
            return Err(Error::StepTooLarge {
                dt: self.dt,
                product,
                limit: STABILITY_LIMIT,
            });
        }
        Ok(times)
    }
}

/// `max |(ξ + γ μ²/ξ) / (1 + ξ²)|` over all modes with a non-zero symbol.
pub fn max_linear_symbol(grid: &Grid2D, gamma: Gamma) -> f64 {
    let (xi, mu) = (grid.x().wavenumbers(), grid.y().wavenumbers());
    let g = gamma.value();
    let nyq = grid.x().nyquist_index();
    let mut worst: f64 = 0.0;
    for (j, &k) in xi.iter().enumerate() {
        if j == 0 || j == nyq {
            continue;
        }
        for &m in mu {
            worst = worst.max(((k + g * m * m / k) / (1.0 + k * k)).abs());
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub struct Trajectory2D {
    pub times: Vec<f64>,
    pub states: Vec<Field2D>,
    pub config: BbmKpConfig,
}

impl Trajectory2D {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub(crate) struct BbmKpSystem {
    grid: Grid2D,
    linear: Vec<Complex64>,
    nonlinear: Vec<Complex64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl BbmKpSystem {
    pub(crate) fn new(grid: &Grid2D, gamma: Gamma, dealias: bool) -> Self {
        let (xi, mu) = (grid.x().wavenumbers(), grid.y().wavenumbers());
        let nyq = grid.x().nyquist_index();
        let g = gamma.value();
        let zero = Complex64::new(0.0, 0.0);
        let mut linear = Vec::with_capacity(grid.size());
        let mut nonlinear = Vec::with_capacity(grid.size());
        for &m in mu {
            for (j, &k) in xi.iter().enumerate() {
                if j == 0 || j == nyq {
                    linear.push(zero);
                    nonlinear.push(zero);
                    continue;
                }
                let d = 1.0 + k * k;
                linear.push(Complex64::new(0.0, -(k + g * m * m / k) / d));
                // Truncation acts along x only: the product is differentiated in
                // x alone, and cutting it in y would couple distant rows.
                if dealias && !grid.x().retained(j) {
                    nonlinear.push(zero);
                } else {
                    nonlinear.push(Complex64::new(0.0, -0.5 * k / d));
                }
            }
        }
        Self {
            grid: grid.clone(),
            linear,
            nonlinear,
            buf: vec![zero; grid.size()],
            scratch: vec![zero; grid.size()],
        }
    }
}

impl SpectralSystem for BbmKpSystem {
    fn dim(&self) -> usize {
        self.grid.size()
    }

    fn rhs(&mut self, state: &[Complex64], out: &mut [Complex64]) -> f64 {
        self.buf.copy_from_slice(state);
        fft2(&self.grid, &mut self.buf, &mut self.scratch, false);
        let scale = 1.0 / self.grid.size() as f64;
        let mut max_abs: f64 = 0.0;
        for c in self.buf.iter_mut() {
            let v = c.re * scale;
            max_abs = max_abs.max(v.abs());
            if !v.is_finite() {
                max_abs = f64::INFINITY;
            }
            *c = Complex64::new(v * v, 0.0);
        }
        fft2(&self.grid, &mut self.buf, &mut self.scratch, true);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.linear[i] * state[i] + self.nonlinear[i] * self.buf[i];
        }
        max_abs
    }
}

/// Per-slice x-means must agree across y for the nonlocal term to exist.
pub fn check_gauge(eta: &Field2D, tol: MeanTolerance) -> Result<()> {
    let means = eta.x_means();
    let reference = means.iter().sum::<f64>() / means.len() as f64;
    let limit = tol.absolute_for(eta.max_abs());
    for (row, m) in means.into_iter().enumerate() {
        if (m - reference).abs() > limit {
            return Err(Error::NonZeroXMean {
                row,
                mean: m - reference,
            });
        }
    }
    Ok(())
}

pub(crate) fn to_physical_2d(grid: &Grid2D, coeffs: &[Complex64]) -> Result<Field2D> {
    let mut buf = coeffs.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); buf.len()];
    fft2(grid, &mut buf, &mut scratch, false);
    let scale = 1.0 / grid.size() as f64;
    Field2D::new(grid.clone(), buf.iter().map(|c| c.re * scale).collect())
}

/// `η_t` of the BBM-KP equation at state `eta`.
pub fn bbmkp_rhs(eta: &Field2D, gamma: Gamma, dealias: bool) -> Result<Field2D> {
    check_gauge(eta, MeanTolerance::default())?;
    let mut system = BbmKpSystem::new(eta.grid(), gamma, dealias);
    let state = eta.spectrum().coeffs().to_vec();
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    system.rhs(&state, &mut out);
    to_physical_2d(eta.grid(), &out)
}

/// Integrates the BBM-KP equation from `psi` with RK4.
pub fn integrate_bbmkp(psi: &Field2D, cfg: &BbmKpConfig) -> Result<Trajectory2D> {
    let grid = psi.grid().clone();
    let times = cfg.validate(&grid)?;
    check_gauge(psi, MeanTolerance::default())?;
    let mut system = BbmKpSystem::new(&grid, cfg.gamma, cfg.dealias);
    let mut traj = Trajectory2D {
        times: Vec::new(),
        states: Vec::new(),
        config: *cfg,
    };
    integrate(
        &mut system,
        psi.spectrum().coeffs().to_vec(),
        times,
        cfg.snapshot_stride,
        |t, coeffs| {
            let field = to_physical_2d(&grid, coeffs).map_err(|_| Error::BlowUp {
                t,
                max_abs: f64::INFINITY,
            })?;
            let max_abs = field.max_abs();
            traj.times.push(t);
            traj.states.push(field);
            Ok(max_abs)
        },
    )?;
    Ok(traj)
}

/// `∫∫ (η² + η_x²) dx dy`.
pub fn energy_2d(eta: &Field2D) -> f64 {
    let l2 = eta.l2_norm();
    let dx = eta.deriv_x(1).l2_norm();
    l2 * l2 + dx * dx
}
