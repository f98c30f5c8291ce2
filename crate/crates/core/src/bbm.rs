//! The BBM equation `u_t + u_x + u u_x - u_xxt = 0` on a periodic line.
//!
//! Inverting `1 - ∂_x²` gives the semilinear form
//!
//! ```text
//! û_t = -(iξ / (1 + ξ²)) (û + ½ (u²)^)
//! ```
//!
//! whose multiplier is bounded by ½, so explicit RK4 is stable for O(1) steps.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{hk_norm_1d, Field1D, Grid1D};
use crate::stepping::{integrate, SpectralSystem, TimeGrid};

/// Time-stepping parameters shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BbmConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    #[serde(default = "default_dealias")]
    pub dealias: bool,
}

pub(crate) fn default_dealias() -> bool {
    true
}

impl BbmConfig {
    pub fn new(dt: f64, t_end: f64, snapshot_stride: usize) -> Self {
        Self {
            dt,
            t_end,
            snapshot_stride,
            dealias: true,
        }
    }

    pub fn validate(&self) -> Result<TimeGrid> {
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidConfig("snapshot_stride must be >= 1".into()));
        }
        TimeGrid::new(self.dt, self.t_end)
    }
}

/// Snapshots of a 1D solution.
#[derive(Debug, Clone)]
pub struct Trajectory1D {
    pub times: Vec<f64>,
    pub states: Vec<Field1D>,
    pub config: BbmConfig,
}

impl Trajectory1D {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&Field1D> {
        self.states.last()
    }

    /// Copy with every state multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Trajectory1D {
        Trajectory1D {
            times: self.times.clone(),
            states: self.states.iter().map(|s| s.scaled(factor)).collect(),
            config: self.config,
        }
    }
}

/// Coefficient-space right-hand side of the BBM equation.
pub(crate) struct BbmSystem {
    grid: Grid1D,
    multiplier: Vec<Complex64>,
    dealias: bool,
    buf: Vec<Complex64>,
}

impl BbmSystem {
    pub(crate) fn new(grid: &Grid1D, dealias: bool) -> Self {
        let nyq = grid.nyquist_index();
        let multiplier = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(j, &xi)| {
                if j == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -xi / (1.0 + xi * xi))
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            multiplier,
            dealias,
            buf: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }
}

impl SpectralSystem for BbmSystem {
    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn rhs(&mut self, state: &[Complex64], out: &mut [Complex64]) -> f64 {
        let plans = self.grid.plans();
        self.buf.copy_from_slice(state);
        plans.inverse(&mut self.buf);
        let scale = 1.0 / self.grid.n() as f64;
        let mut max_abs: f64 = 0.0;
        for c in self.buf.iter_mut() {
            let u = c.re * scale;
            max_abs = max_abs.max(u.abs());
            if !u.is_finite() {
                max_abs = f64::INFINITY;
            }
            *c = Complex64::new(u * u, 0.0);
        }
        plans.forward(&mut self.buf);
        for (j, o) in out.iter_mut().enumerate() {
            let nonlinear = if !self.dealias || self.grid.retained(j) {
                self.buf[j] * 0.5
            } else {
                Complex64::new(0.0, 0.0)
            };
            *o = self.multiplier[j] * (state[j] + nonlinear);
        }
        max_abs
    }
}

/// `u_t` of the BBM equation at state `u`.
pub fn bbm_rhs(u: &Field1D, dealias: bool) -> Field1D {
    let mut system = BbmSystem::new(u.grid(), dealias);
    let state = u.spectrum().coeffs().to_vec();
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    system.rhs(&state, &mut out);
    let mut buf = out;
    u.grid().plans().inverse(&mut buf);
    let scale = 1.0 / u.grid().n() as f64;
    Field1D::from_raw(u.grid().clone(), buf.iter().map(|c| c.re * scale).collect())
}

pub(crate) fn to_physical_1d(grid: &Grid1D, coeffs: &[Complex64]) -> Result<Field1D> {
    let mut buf = coeffs.to_vec();
    grid.plans().inverse(&mut buf);
    let scale = 1.0 / grid.n() as f64;
    Field1D::new(grid.clone(), buf.iter().map(|c| c.re * scale).collect())
}

/// Integrates the BBM equation from `phi` with RK4.
pub fn integrate_bbm(phi: &Field1D, cfg: &BbmConfig) -> Result<Trajectory1D> {
    let times = cfg.validate()?;
    let grid = phi.grid().clone();
    let mut system = BbmSystem::new(&grid, cfg.dealias);
    let mut traj = Trajectory1D {
        times: Vec::new(),
        states: Vec::new(),
        config: *cfg,
    };
    integrate(
        &mut system,
        phi.spectrum().coeffs().to_vec(),
        times,
        cfg.snapshot_stride,
        |t, coeffs| {
            let field = to_physical_1d(&grid, coeffs).map_err(|_| Error::BlowUp {
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

/// Mass `∫ u dx` and energy `∫ (u² + u_x²) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BbmInvariants {
    pub mass: f64,
    pub energy: f64,
}

pub fn bbm_invariants(u: &Field1D) -> BbmInvariants {
    let h1 = hk_norm_1d(u, 1);
    BbmInvariants {
        mass: u.integral(),
        energy: h1 * h1,
    }
}

/// Decay rate `κ = ½ sqrt((c-1)/c)` of the solitary wave of speed `c`.
pub fn solitary_wave_rate(c: f64) -> f64 {
    0.5 * ((c - 1.0) / c).sqrt()
}

/// Minimum samples per half-width `1/κ` for a solitary wave to be resolved.
pub const SOLITARY_POINTS_PER_HALF_WIDTH: f64 = 8.0;

/// Exact solitary wave `3(c-1) sech²(κ (x - x0))` moving with speed `c`.
pub fn solitary_wave(grid: &Grid1D, c: f64, x0: f64) -> Result<Field1D> {
    if !(c.is_finite() && c > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "solitary wave speed must exceed 1, got {c}"
        )));
    }
    let kappa = solitary_wave_rate(c);
    let points = 1.0 / (kappa * grid.spacing());
    if points < SOLITARY_POINTS_PER_HALF_WIDTH {
        return Err(Error::UnresolvedProfile(format!(
            "solitary wave c = {c} has {points:.2} points per half-width (need {SOLITARY_POINTS_PER_HALF_WIDTH})"
        )));
    }
    let amplitude = 3.0 * (c - 1.0);
    Field1D::from_fn(grid, |x| {
        let s = 1.0 / (kappa * grid.periodic_distance(x, x0)).cosh();
        amplitude * s * s
    })
}

/// Max of the travelling-wave residual `(1 - c) u' + u u' + c u'''`.
///
/// Vanishes (to spectral accuracy) for the profile of [`solitary_wave`].
pub fn solitary_wave_residual(u: &Field1D, c: f64) -> f64 {
    let d1 = u.deriv_x(1);
    let d3 = u.deriv_x(3);
    u.values()
        .iter()
        .zip(d1.values())
        .zip(d3.values())
        .map(|((&v, &v1), &v3)| ((1.0 - c) * v1 + v * v1 + c * v3).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn rhs_of_zero_is_zero() {
        let g = Grid1D::new(32, 10.0).unwrap();
        assert_eq!(bbm_rhs(&Field1D::zeros(&g), true).max_abs(), 0.0);
    }

    #[test]
    fn rhs_matches_linear_dispersion() {
        let l = 20.0;
        let g = Grid1D::new(64, l).unwrap();
        let k = TAU / l;
        let eps = 1e-6;
        let u = Field1D::from_fn(&g, |x| eps * (k * x).cos()).unwrap();
        let rhs = bbm_rhs(&u, true);
        let expected = Field1D::from_fn(&g, |x| eps * k / (1.0 + k * k) * (k * x).sin()).unwrap();
        let err = rhs
            .values()
            .iter()
            .zip(expected.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        // Nonlinear contribution is O(ε²).
        assert!(err < 10.0 * eps * eps, "err {err}");
    }

    #[test]
    fn solitary_wave_amplitude_and_limit() {
        let g = Grid1D::new(1024, 128.0).unwrap();
        let u = solitary_wave(&g, 1.5, 0.0).unwrap();
        assert!((u.values()[512] - 1.5).abs() < 1e-14);
        let g = Grid1D::new(4096, 4096.0).unwrap();
        let u = solitary_wave(&g, 1.0001, 0.0).unwrap();
        assert!(u.max_abs() < 3.1e-4);
    }

    #[test]
    fn solitary_wave_rejects_slow_or_unresolved() {
        let g = Grid1D::new(64, 128.0).unwrap();
        assert!(matches!(
            solitary_wave(&g, 0.9, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            solitary_wave(&g, 3.0, 0.0),
            Err(Error::UnresolvedProfile(_))
        ));
    }

    #[test]
    fn solitary_profile_solves_travelling_wave_ode() {
        for c in [1.5, 2.0] {
            let g = Grid1D::new(1024, 128.0).unwrap();
            let u = solitary_wave(&g, c, 3.0).unwrap();
            let r = solitary_wave_residual(&u, c);
            assert!(r <= 1e-8, "c = {c}: residual {r}");
        }
    }

    #[test]
    fn rhs_of_solitary_wave_is_translation() {
        let c = 1.5;
        let g = Grid1D::new(1024, 128.0).unwrap();
        let u = solitary_wave(&g, c, 0.0).unwrap();
        let rhs = bbm_rhs(&u, true);
        let ux = u.deriv_x(1);
        let err = rhs
            .values()
            .iter()
            .zip(ux.values())
            .fold(0.0f64, |m, (a, b)| m.max((a + c * b).abs()));
        assert!(err <= 1e-8, "err {err}");
    }

    #[test]
    fn invariants_of_cosine() {
        let l = 9.0;
        let g = Grid1D::new(32, l).unwrap();
        let k = TAU / l;
        let u = Field1D::from_fn(&g, |x| (k * x).cos()).unwrap();
        let inv = bbm_invariants(&u);
        assert!(inv.mass.abs() < 1e-13);
        assert!((inv.energy - (1.0 + k * k) * l / 2.0).abs() < 1e-12);
        let z = bbm_invariants(&Field1D::zeros(&g));
        assert_eq!((z.mass, z.energy), (0.0, 0.0));
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid1D::new(32, 10.0).unwrap();
        let traj = integrate_bbm(&Field1D::zeros(&g), &BbmConfig::new(0.1, 1.0, 2)).unwrap();
        let expected = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        assert_eq!(traj.times.len(), expected.len());
        for (t, e) in traj.times.iter().zip(expected) {
            assert!((t - e).abs() < 1e-14);
        }
        assert!(traj.states.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn invalid_config_rejected() {
        let g = Grid1D::new(32, 10.0).unwrap();
        let phi = Field1D::zeros(&g);
        assert!(integrate_bbm(&phi, &BbmConfig::new(2.0, 1.0, 1)).is_err());
        assert!(integrate_bbm(&phi, &BbmConfig::new(0.1, 1.0, 0)).is_err());
    }
}
