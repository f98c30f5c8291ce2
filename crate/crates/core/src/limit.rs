//! Comparison of a BBM-KP solution with the BBM solutions it approaches as
//! `y → ±∞`.
//!
//! With `T(y)` a transverse profile tending to `±1`, the comparison function
//!
//! ```text
//! w = η - ½ (u⁺ + u⁻) - ½ (u⁺ - u⁻) T(y)
//! ```
//!
//! obeys, slice by slice, the a priori bound
//!
//! ```text
//! ‖w(t)‖ ≤ ‖w(0)‖ e^{(C₊+C₋)t} + (C_η + C₁)/(C₊ + C₋) (e^{(C₊+C₋)t} - 1)
//! ```
//!
//! with `C_η = ‖∂_x^{-1} η_yy‖`, `C₁ = (1 - T²) a(‖u⁺‖, ‖u⁻‖)` and
//! `C_± = ½ (1 ± T) ‖u^±‖_{H¹}`. This module evaluates every piece of that
//! statement on simulated trajectories.

use serde::Serialize;

use crate::bbm::{bbm_rhs, Trajectory1D};
use crate::bbmkp::{bbmkp_rhs, Trajectory2D};
use crate::error::{Error, Result};
use crate::spectral::{hk_norm_1d, hk_x_profile, Field1D, Field2D, Grid1D, Grid2D};

/// Below this `C₊ + C₋` the bound switches to its `C → 0` limit.
pub const DEGENERATE_RATE: f64 = 1e-12;

/// Default relative slack on bound satisfaction.
pub const DEFAULT_SLACK: f64 = 0.05;

/// Default tail-ratio threshold.
pub const DEFAULT_TAIL_RATIO: f64 = 0.1;

/// Transverse interpolation profile `T(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransverseProfile {
    /// `tanh(y)` on the centred coordinate; used when `u⁺ = u⁻`, where the
    /// profile multiplies zero and its lack of periodicity is harmless.
    Tanh,
    /// `tanh(y + Ly/4) - tanh(y - Ly/4) - 1`: ≈ +1 on `|y| < Ly/4`, ≈ -1 near
    /// `y = ±Ly/2`, smooth and periodic to round-off.
    Plateau { ly: f64 },
}

impl TransverseProfile {
    /// `Tanh` when both limits coincide, otherwise the periodic plateau.
    pub fn for_limits(phi_plus: &Field1D, phi_minus: &Field1D, ly: f64) -> Self {
        if phi_plus.values() == phi_minus.values() {
            TransverseProfile::Tanh
        } else {
            TransverseProfile::Plateau { ly }
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            TransverseProfile::Tanh => y.tanh(),
            TransverseProfile::Plateau { ly } => {
                (y + 0.25 * ly).tanh() - (y - 0.25 * ly).tanh() - 1.0
            }
        }
    }

    /// Rows read as the `+∞` and `-∞` far fields.
    ///
    /// For `Tanh` these are `y ≥ Ly/4` and `y ≤ -Ly/4`. For the plateau,
    /// where `T ≈ +1` around the centre and `T ≈ -1` around the boundary,
    /// they are `|y| ≤ Ly/8` and `|y| ≥ 3Ly/8`.
    pub fn tail_rows(&self, y_grid: &Grid1D) -> (Vec<usize>, Vec<usize>) {
        let ly = y_grid.length();
        let ys = y_grid.points();
        let pick = |pred: &dyn Fn(f64) -> bool| -> Vec<usize> {
            ys.iter()
                .enumerate()
                .filter(|(_, &y)| pred(y))
                .map(|(i, _)| i)
                .collect()
        };
        match self {
            TransverseProfile::Tanh => (
                pick(&|y| y >= 0.25 * ly),
                pick(&|y| y <= -0.25 * ly),
            ),
            TransverseProfile::Plateau { .. } => (
                pick(&|y| y.abs() <= 0.125 * ly),
                pick(&|y| y.abs() >= 0.375 * ly),
            ),
        }
    }

    /// Rows standing in for `y → +∞` and `y → -∞`: the last and first grid
    /// rows for `Tanh`, the centre row and the wrap row for the plateau.
    pub fn edge_rows(&self, y_grid: &Grid1D) -> (usize, usize) {
        match self {
            TransverseProfile::Tanh => (y_grid.n() - 1, 0),
            TransverseProfile::Plateau { .. } => (y_grid.n() / 2, 0),
        }
    }
}

fn check_axes(grid: &Grid2D, u_plus: &Field1D, u_minus: &Field1D) -> Result<()> {
    if u_plus.grid() != grid.x() || u_minus.grid() != grid.x() {
        return Err(Error::GridMismatch(
            "BBM fields do not live on the x-axis of the BBM-KP grid".into(),
        ));
    }
    Ok(())
}

/// `A(x, y) = ½(1+T) u⁺ + ½(1-T) u⁻`, the blend subtracted from `η`.
fn blend(grid: &Grid2D, u_plus: &Field1D, u_minus: &Field1D, profile: TransverseProfile) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.size());
    for iy in 0..grid.ny() {
        let t = profile.eval(grid.y().point(iy));
        let (a, b) = (0.5 * (1.0 + t), 0.5 * (1.0 - t));
        out.extend(
            u_plus
                .values()
                .iter()
                .zip(u_minus.values())
                .map(|(p, m)| a * p + b * m),
        );
    }
    out
}

/// `½(u⁺+u⁻) + ½(u⁺-u⁻) T(y)` sampled on `grid`.
pub fn blend_field(
    grid: &Grid2D,
    u_plus: &Field1D,
    u_minus: &Field1D,
    profile: TransverseProfile,
) -> Result<Field2D> {
    check_axes(grid, u_plus, u_minus)?;
    Field2D::new(grid.clone(), blend(grid, u_plus, u_minus, profile))
}

/// `w = η - ½(u⁺+u⁻) - ½(u⁺-u⁻) T(y)`.
pub fn build_w(
    eta: &Field2D,
    u_plus: &Field1D,
    u_minus: &Field1D,
    profile: TransverseProfile,
) -> Result<Field2D> {
    check_axes(eta.grid(), u_plus, u_minus)?;
    let a = blend(eta.grid(), u_plus, u_minus, profile);
    Field2D::new(
        eta.grid().clone(),
        eta.values().iter().zip(&a).map(|(e, a)| e - a).collect(),
    )
}

/// `w(x, y, 0)` built from the initial data.
pub fn w_initial(
    psi: &Field2D,
    phi_plus: &Field1D,
    phi_minus: &Field1D,
    profile: TransverseProfile,
) -> Result<Field2D> {
    build_w(psi, phi_plus, phi_minus, profile)
}

/// `w` together with the fields it was built from.
#[derive(Debug, Clone)]
pub struct ComparisonState {
    pub w: Field2D,
    pub eta: Field2D,
    pub u_plus: Field1D,
    pub u_minus: Field1D,
    pub t: f64,
    pub profile: TransverseProfile,
}

impl ComparisonState {
    pub fn new(
        eta: Field2D,
        u_plus: Field1D,
        u_minus: Field1D,
        t: f64,
        profile: TransverseProfile,
    ) -> Result<Self> {
        let w = build_w(&eta, &u_plus, &u_minus, profile)?;
        Ok(Self {
            w,
            eta,
            u_plus,
            u_minus,
            t,
            profile,
        })
    }

    /// `η` recovered from `w` by adding the blend back.
    pub fn reconstruct_eta(&self) -> Result<Field2D> {
        let a = blend(self.w.grid(), &self.u_plus, &self.u_minus, self.profile);
        Field2D::new(
            self.w.grid().clone(),
            self.w.values().iter().zip(&a).map(|(w, a)| w + a).collect(),
        )
    }
}

fn check_alignment(traj2d: &Trajectory2D, traj_plus: &Trajectory1D, traj_minus: &Trajectory1D) -> Result<()> {
    for (name, times) in [("u+", &traj_plus.times), ("u-", &traj_minus.times)] {
        if times.len() != traj2d.times.len() {
            return Err(Error::TimeMisalignment(format!(
                "{name} has {} snapshots, eta has {}",
                times.len(),
                traj2d.times.len()
            )));
        }
        for (i, (a, b)) in times.iter().zip(&traj2d.times).enumerate() {
            if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
                return Err(Error::TimeMisalignment(format!(
                    "snapshot {i}: {name} at t = {a}, eta at t = {b}"
                )));
            }
        }
    }
    if traj2d.is_empty() {
        return Err(Error::EmptyInput("trajectories have no snapshots".into()));
    }
    Ok(())
}

fn check_index(t_index: usize, len: usize) -> Result<()> {
    if t_index >= len {
        return Err(Error::IndexOutOfRange { index: t_index, len });
    }
    Ok(())
}

/// Left side of the evolution equation satisfied by `w`, evaluated on a
/// snapshot:
///
/// ```text
/// w_t + w_x - w_xxt + γ ∂_x^{-1} η_yy + w w_x + a (u⁺ w)_x + b (u⁻ w)_x
///     - a b (u⁺u⁺_x + u⁻u⁻_x - u⁺u⁻_x - u⁻u⁺_x)
/// ```
///
/// with `a = ½(1+T)`, `b = ½(1-T)`. Time derivatives come from the solver
/// right-hand sides. For `γ = -1` this is exactly the form of the classical
/// derivation; the sign of the nonlocal term follows `γ` in general.
pub fn w_residual(
    traj2d: &Trajectory2D,
    traj_plus: &Trajectory1D,
    traj_minus: &Trajectory1D,
    t_index: usize,
    profile: TransverseProfile,
) -> Result<Field2D> {
    check_alignment(traj2d, traj_plus, traj_minus)?;
    check_index(t_index, traj2d.len())?;
    let eta = &traj2d.states[t_index];
    let (up, um) = (&traj_plus.states[t_index], &traj_minus.states[t_index]);
    let grid = eta.grid();
    check_axes(grid, up, um)?;
    let gamma = traj2d.config.gamma.value();

    let eta_t = bbmkp_rhs(eta, traj2d.config.gamma, traj2d.config.dealias)?;
    let up_t = bbm_rhs(up, traj_plus.config.dealias);
    let um_t = bbm_rhs(um, traj_minus.config.dealias);
    let blend_t = blend(grid, &up_t, &um_t, profile);
    let w_t = Field2D::from_raw(
        grid.clone(),
        eta_t.values().iter().zip(&blend_t).map(|(e, b)| e - b).collect(),
    );

    let w = build_w(eta, up, um, profile)?;
    let nonlocal = eta.deriv_y(2).antideriv_x()?;
    // ww_x + a(u⁺w)_x + b(u⁻w)_x - ab(...) = ∂_x Q with
    // Q = ½w² + a u⁺w + b u⁻w - ½ab(u⁺ - u⁻)², dealiased like the solver.
    let mut q = Vec::with_capacity(grid.size());
    for (iy, row) in w.rows().enumerate() {
        let t = profile.eval(grid.y().point(iy));
        let (a, b) = (0.5 * (1.0 + t), 0.5 * (1.0 - t));
        for ((&p, &m), &wv) in up.values().iter().zip(um.values()).zip(row) {
            q.push(0.5 * wv * wv + a * p * wv + b * m * wv - 0.5 * a * b * (p - m) * (p - m));
        }
    }
    let mut q = Field2D::from_raw(grid.clone(), q);
    if traj2d.config.dealias {
        q = q.dealias_x();
    }
    let quad_x = q.deriv_x(1);
    let linear = w_t.deriv_x(2);
    let w_x = w.deriv_x(1);
    let out: Vec<f64> = (0..grid.size())
        .map(|i| {
            w_t.values()[i] - linear.values()[i]
                + w_x.values()[i]
                + gamma * nonlocal.values()[i]
                + quad_x.values()[i]
        })
        .collect();
    Field2D::new(grid.clone(), out)
}

/// The aggregator of the cross-term constant: `a(p, q) = ¼ (p + q)²`.
///
/// Bounding each of the four products `|u^a|_∞ ‖u^b_x‖` by `‖u^a‖ ‖u^b‖`
/// and summing with the common factor ¼ gives exactly this expression.
pub fn aggregator(p: f64, q: f64) -> f64 {
    0.25 * (p + q) * (p + q)
}

/// Constants of the a priori bound on one slice at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallConstants {
    pub c_eta: f64,
    pub c_1: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub y: f64,
    pub t: f64,
}

impl GronwallConstants {
    pub fn rate(&self) -> f64 {
        self.c_plus + self.c_minus
    }

    pub fn forcing(&self) -> f64 {
        self.c_eta + self.c_1
    }

    /// Componentwise maximum, stamped with the later time.
    pub fn sup(&self, other: &GronwallConstants) -> GronwallConstants {
        GronwallConstants {
            c_eta: self.c_eta.max(other.c_eta),
            c_1: self.c_1.max(other.c_1),
            c_plus: self.c_plus.max(other.c_plus),
            c_minus: self.c_minus.max(other.c_minus),
            y: self.y,
            t: self.t.max(other.t),
        }
    }
}

/// `∂_x^{-1} η_yy`, the nonlocal forcing of the comparison equation.
pub fn transverse_forcing(eta: &Field2D) -> Result<Field2D> {
    eta.deriv_y(2).antideriv_x()
}

/// Norms of the limiting BBM states that enter the constants.
#[derive(Debug, Clone, Copy)]
struct LimitNorms {
    plus_h1: f64,
    minus_h1: f64,
    plus_hk: f64,
    minus_hk: f64,
}

impl LimitNorms {
    fn new(u_plus: &Field1D, u_minus: &Field1D, k: u32) -> Self {
        Self {
            plus_h1: hk_norm_1d(u_plus, 1),
            minus_h1: hk_norm_1d(u_minus, 1),
            plus_hk: hk_norm_1d(u_plus, k),
            minus_hk: hk_norm_1d(u_minus, k),
        }
    }

    fn constants(&self, c_eta: f64, tprof: f64, y: f64, t: f64) -> GronwallConstants {
        GronwallConstants {
            c_eta,
            c_1: (1.0 - tprof * tprof) * aggregator(self.plus_hk, self.minus_hk),
            c_plus: 0.5 * (1.0 + tprof) * self.plus_h1,
            c_minus: 0.5 * (1.0 - tprof) * self.minus_h1,
            y,
            t,
        }
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "the a priori bound needs Sobolev index k >= 1".into(),
        ));
    }
    Ok(())
}

/// Constants for the `H^k_x` bound on row `y_index` at time `t`.
///
/// `C_η = ‖∂_x^{-1} η_yy‖_{H^{k-1}_x}` and `C₁` uses `‖u^±‖_{H^k}`; both
/// reduce to the L² / H¹ forms for `k = 1`. `C_±` always use `‖u^±‖_{H¹}`.
pub fn gronwall_constants(
    eta: &Field2D,
    u_plus: &Field1D,
    u_minus: &Field1D,
    y_index: usize,
    t: f64,
    k: u32,
    profile: TransverseProfile,
) -> Result<GronwallConstants> {
    check_k(k)?;
    check_axes(eta.grid(), u_plus, u_minus)?;
    let ny = eta.grid().ny();
    if y_index >= ny {
        return Err(Error::IndexOutOfRange { index: y_index, len: ny });
    }
    let forcing = transverse_forcing(eta)?;
    let c_eta = hk_norm_1d(&forcing.slice(y_index)?, k - 1);
    let y = eta.grid().y().point(y_index);
    Ok(LimitNorms::new(u_plus, u_minus, k).constants(c_eta, profile.eval(y), y, t))
}

/// Constants for every row at once.
pub fn gronwall_constants_all_rows(
    eta: &Field2D,
    u_plus: &Field1D,
    u_minus: &Field1D,
    t: f64,
    k: u32,
    profile: TransverseProfile,
) -> Result<Vec<GronwallConstants>> {
    check_k(k)?;
    check_axes(eta.grid(), u_plus, u_minus)?;
    let forcing = transverse_forcing(eta)?;
    let c_eta = hk_x_profile(&forcing, k - 1);
    let norms = LimitNorms::new(u_plus, u_minus, k);
    let yg = eta.grid().y();
    Ok(c_eta
        .into_iter()
        .enumerate()
        .map(|(iy, c)| {
            let y = yg.point(iy);
            norms.constants(c, profile.eval(y), y, t)
        })
        .collect())
}

/// Right side of the a priori bound at time `t`.
pub fn gronwall_bound(w0_norm: f64, consts: &GronwallConstants, t: f64) -> Result<f64> {
    let named = [
        ("w0_norm", w0_norm),
        ("t", t),
        ("c_eta", consts.c_eta),
        ("c_1", consts.c_1),
        ("c_plus", consts.c_plus),
        ("c_minus", consts.c_minus),
    ];
    for (name, v) in named {
        if v.is_nan() || v < 0.0 {
            return Err(Error::NegativeInput(format!("{name} = {v}")));
        }
    }
    let rate = consts.rate();
    let forcing = consts.forcing();
    if rate < DEGENERATE_RATE {
        return Ok(w0_norm + forcing * t);
    }
    let growth = (rate * t).exp();
    Ok(w0_norm * growth + forcing / rate * (rate * t).exp_m1())
}

/// `‖w(·, y, t)‖_{H^k_x}` for every row at snapshot `t_index`.
pub fn decay_profile(
    traj2d: &Trajectory2D,
    traj_plus: &Trajectory1D,
    traj_minus: &Trajectory1D,
    k: u32,
    t_index: usize,
    profile: TransverseProfile,
) -> Result<Vec<f64>> {
    check_alignment(traj2d, traj_plus, traj_minus)?;
    check_index(t_index, traj2d.len())?;
    let w = build_w(
        &traj2d.states[t_index],
        &traj_plus.states[t_index],
        &traj_minus.states[t_index],
        profile,
    )?;
    Ok(hk_x_profile(&w, k))
}

/// Largest value over `rows` divided by the largest value overall; zero for
/// an identically zero profile.
pub fn tail_ratio(profile: &[f64], rows: &[usize]) -> f64 {
    let global = profile.iter().cloned().fold(0.0, f64::max);
    if global == 0.0 {
        return 0.0;
    }
    rows.iter().map(|&i| profile[i]).fold(0.0, f64::max) / global
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub slack: f64,
    pub tail_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            slack: DEFAULT_SLACK,
            tail_ratio: DEFAULT_TAIL_RATIO,
        }
    }
}

/// One `(t, y, k)` entry of the bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub t: f64,
    pub y: f64,
    pub k: u32,
    pub w_norm: f64,
    /// Supremum over snapshots up to `t`.
    pub constants: GronwallConstants,
    pub bound: f64,
    pub satisfied: bool,
}

/// Tail ratios of the `H^k_x` profile at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRatios {
    pub t: f64,
    pub k: u32,
    pub plus: f64,
    pub minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub bound_violations: usize,
    /// Largest `w_norm / bound` over rows above the round-off floor.
    pub worst_bound_ratio: f64,
    pub final_time: f64,
    pub final_tail_plus: f64,
    pub final_tail_minus: f64,
    pub tails_within_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub k_values: Vec<u32>,
    pub thresholds: Thresholds,
    /// How time-dependent constants enter the bound.
    pub constants_reading: &'static str,
    #[serde(skip)]
    pub rows: Vec<BoundRow>,
    pub tails: Vec<TailRatios>,
    pub verdict: Verdict,
}

pub const SUP_IN_TIME: &str = "sup-in-time";

/// Relative size of the round-off floor added to every bound.
///
/// The solver and the initial data differ by a few ulps even where the exact
/// bound is zero (far rows at `t = 0`, y-independent data).
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Whether `w_norm` respects `bound` up to the relative slack and an
/// absolute round-off floor.
pub fn within_bound(w_norm: f64, bound: f64, slack: f64, floor: f64) -> bool {
    w_norm <= bound * (1.0 + slack) + floor
}

fn roundoff_floors(rows: &[BoundRow]) -> Vec<(u32, f64)> {
    let mut out: Vec<(u32, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(k, _)| *k == r.k) {
            Some((_, m)) => *m = m.max(r.w_norm),
            None => out.push((r.k, r.w_norm)),
        }
    }
    for (_, m) in out.iter_mut() {
        *m = ROUNDOFF_FLOOR * m.max(1.0);
    }
    out
}

/// Assembles the verdict: every row must respect its bound and, at the final
/// snapshot, both tail ratios must stay below the threshold for every `k`.
pub fn verify_theorem(
    mut rows: Vec<BoundRow>,
    tails: Vec<TailRatios>,
    thresholds: Thresholds,
) -> Result<LimitReport> {
    if rows.is_empty() || tails.is_empty() {
        return Err(Error::EmptyInput("no bound rows or tail ratios".into()));
    }
    let floors = roundoff_floors(&rows);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for row in rows.iter_mut() {
        let floor = floors.iter().find(|(k, _)| *k == row.k).map_or(0.0, |f| f.1);
        row.satisfied = within_bound(row.w_norm, row.bound, thresholds.slack, floor);
        if !row.satisfied {
            violations += 1;
        }
        if row.w_norm <= floor {
            continue;
        }
        if row.bound > 0.0 {
            worst = worst.max(row.w_norm / row.bound);
        } else {
            worst = f64::INFINITY;
        }
    }
    let final_time = tails.iter().map(|r| r.t).fold(f64::NEG_INFINITY, f64::max);
    let last: Vec<&TailRatios> = tails.iter().filter(|r| r.t == final_time).collect();
    let final_tail_plus = last.iter().map(|r| r.plus).fold(0.0, f64::max);
    let final_tail_minus = last.iter().map(|r| r.minus).fold(0.0, f64::max);
    let tails_ok = final_tail_plus <= thresholds.tail_ratio && final_tail_minus <= thresholds.tail_ratio;
    let mut k_values: Vec<u32> = rows.iter().map(|r| r.k).collect();
    k_values.sort_unstable();
    k_values.dedup();
    Ok(LimitReport {
        k_values,
        thresholds,
        constants_reading: SUP_IN_TIME,
        verdict: Verdict {
            pass: violations == 0 && tails_ok,
            bound_violations: violations,
            worst_bound_ratio: worst,
            final_time,
            final_tail_plus,
            final_tail_minus,
            tails_within_threshold: tails_ok,
        },
        rows,
        tails,
    })
}

/// Everything the bound check needs, computed over all snapshots.
#[derive(Debug, Clone)]
pub struct LimitAnalysis {
    pub report: LimitReport,
    /// `(t, y, k, ‖w‖)` in snapshot-major order.
    pub profiles: Vec<(f64, f64, u32, f64)>,
}

/// Runs decay profiles, constants, bounds and the verdict on a trajectory set.
///
/// `w0` is the comparison function built from the initial data; its slice
/// norms seed the bound at every later time.
pub fn analyze_limit(
    traj2d: &Trajectory2D,
    traj_plus: &Trajectory1D,
    traj_minus: &Trajectory1D,
    w0: &Field2D,
    profile: TransverseProfile,
    k_values: &[u32],
    thresholds: Thresholds,
) -> Result<LimitAnalysis> {
    check_alignment(traj2d, traj_plus, traj_minus)?;
    if k_values.is_empty() {
        return Err(Error::EmptyInput("no Sobolev indices requested".into()));
    }
    for &k in k_values {
        check_k(k)?;
    }
    let grid = w0.grid();
    let (plus_rows, minus_rows) = profile.tail_rows(grid.y());
    let ys = grid.y().points();
    let w0_norms: Vec<Vec<f64>> = k_values.iter().map(|&k| hk_x_profile(w0, k)).collect();
    let mut running: Vec<Option<Vec<GronwallConstants>>> = vec![None; k_values.len()];

    let mut rows = Vec::new();
    let mut tails = Vec::new();
    let mut profiles = Vec::new();
    for (i, &t) in traj2d.times.iter().enumerate() {
        let eta = &traj2d.states[i];
        let (up, um) = (&traj_plus.states[i], &traj_minus.states[i]);
        let w = build_w(eta, up, um, profile)?;
        for (ki, &k) in k_values.iter().enumerate() {
            let now = gronwall_constants_all_rows(eta, up, um, t, k, profile)?;
            let sup = match running[ki].take() {
                None => now,
                Some(prev) => prev.iter().zip(&now).map(|(p, n)| p.sup(n)).collect(),
            };
            let w_norms = hk_x_profile(&w, k);
            for (iy, &w_norm) in w_norms.iter().enumerate() {
                let bound = gronwall_bound(w0_norms[ki][iy], &sup[iy], t)?;
                rows.push(BoundRow {
                    t,
                    y: ys[iy],
                    k,
                    w_norm,
                    constants: sup[iy],
                    bound,
                    // Filled in by verify_theorem once the round-off floor is known.
                    satisfied: false,
                });
                profiles.push((t, ys[iy], k, w_norm));
            }
            tails.push(TailRatios {
                t,
                k,
                plus: tail_ratio(&w_norms, &plus_rows),
                minus: tail_ratio(&w_norms, &minus_rows),
            });
            running[ki] = Some(sup);
        }
    }
    let report = verify_theorem(rows, tails, thresholds)?;
    Ok(LimitAnalysis { report, profiles })
}
