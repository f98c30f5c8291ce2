//! Classical four-stage Runge–Kutta stepping of spectral coefficient vectors.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// Magnitude above which a state is treated as numerically unstable.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// A semi-discrete system `dĉ/dt = F(ĉ)` in coefficient space.
pub(crate) trait SpectralSystem {
    fn dim(&self) -> usize;

    /// Writes `F(state)` into `out` and returns `max |u|` of the physical
    /// field represented by `state`.
    fn rhs(&mut self, state: &[Complex64], out: &mut [Complex64]) -> f64;
}

/// Uniform subdivision of `[0, t_end]` with step at most `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub steps: usize,
    pub step: f64,
    pub t_end: f64,
}

impl TimeGrid {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        if dt > t_end {
            return Err(Error::InvalidConfig(format!(
                "dt = {dt} exceeds t_end = {t_end}"
            )));
        }
        let ratio = t_end / dt;
        let nearest = ratio.round();
        let steps = if (ratio - nearest).abs() <= 1e-9 * ratio {
            nearest as usize
        } else {
            ratio.ceil() as usize
        };
        Ok(Self {
            steps,
            step: t_end / steps as f64,
            t_end,
        })
    }

    pub fn time(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            step as f64 * self.step
        }
    }

    /// Step indices at which snapshots are recorded: every `stride` steps,
    /// plus the final step.
    pub fn snapshot_steps(&self, stride: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..=self.steps).step_by(stride.max(1)).collect();
        if out.last() != Some(&self.steps) {
            out.push(self.steps);
        }
        out
    }
}

fn axpy(out: &mut [Complex64], base: &[Complex64], h: f64, k: &[Complex64]) {
    for ((o, b), d) in out.iter_mut().zip(base).zip(k) {
        *o = b + d * h;
    }
}

fn check_magnitude(max_abs: f64, t: f64) -> Result<()> {
    if !max_abs.is_finite() || max_abs > BLOWUP_THRESHOLD {
        return Err(Error::BlowUp { t, max_abs });
    }
    Ok(())
}

/// Advances `state` over the time grid, calling `snapshot(t, state)` at
/// every `stride`-th step and at the end.
pub(crate) fn integrate<S: SpectralSystem>(
    system: &mut S,
    mut state: Vec<Complex64>,
    times: TimeGrid,
    stride: usize,
    mut snapshot: impl FnMut(f64, &[Complex64]) -> Result<f64>,
) -> Result<()> {
    let n = system.dim();
    debug_assert_eq!(state.len(), n);
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    let h = times.step;
    let stride = stride.max(1);

    for step in 0..times.steps {
        let t = times.time(step);
        if step % stride == 0 {
            check_magnitude(snapshot(t, &state)?, t)?;
        }
        check_magnitude(system.rhs(&state, &mut k1), t)?;
        axpy(&mut stage, &state, 0.5 * h, &k1);
        system.rhs(&stage, &mut k2);
        axpy(&mut stage, &state, 0.5 * h, &k2);
        system.rhs(&stage, &mut k3);
        axpy(&mut stage, &state, h, &k3);
        system.rhs(&stage, &mut k4);
        let sixth = h / 6.0;
        for (i, s) in state.iter_mut().enumerate() {
            *s += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth;
        }
    }
    let t = times.t_end;
    check_magnitude(snapshot(t, &state)?, t)?;
    Ok(())
}
