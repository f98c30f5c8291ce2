//! Scenario files: a versioned JSON description of one BBM-KP run together
//! with its two limiting BBM runs.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "s1",
//!   "grid": { "nx": 256, "ny": 128, "lx": 64.0, "ly": 64.0 },
//!   "gamma": 1,
//!   "phi_plus":  { "kind": "gaussian", "amplitude": 1.0, "x0": 0.0, "width": 4.0 },
//!   "phi_minus": { "kind": "gaussian", "amplitude": 1.0, "x0": 0.0, "width": 4.0 },
//!   "perturbation": { "kind": "sech_derivative", "epsilon": 0.2, "sigma": 1.0, "width": 1.0, "x0": 0.0 },
//!   "bbm":   { "dt": 5e-4, "t_end": 1.0, "snapshot_stride": 50 },
//!   "bbmkp": { "dt": 5e-4, "t_end": 1.0, "snapshot_stride": 50 },
//!   "analysis": { "k": [1, 2], "slack": 0.05, "tail_ratio": 0.1 }
//! }
//! ```
//!
//! The initial BBM-KP state is `ψ = ½(φ⁺+φ⁻) + ½(φ⁺-φ⁻) T(y) + p(x, y)`
//! with `p` the perturbation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bbm::{solitary_wave, BbmConfig};
use crate::bbmkp::{BbmKpConfig, Gamma};
use crate::error::{Error, Result};
use crate::limit::{blend_field, Thresholds, TransverseProfile, DEFAULT_SLACK, DEFAULT_TAIL_RATIO};
use crate::spectral::{Field1D, Field2D, Grid1D, Grid2D, MeanTolerance};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest magnitude a profile may keep on the box boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

/// A limiting BBM profile `φ^±(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    SolitaryWave { c: f64, x0: f64 },
    Gaussian { amplitude: f64, x0: f64, width: f64 },
    Zero,
}

/// The transverse perturbation `p(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    /// `ε ∂_x sech((x - x0)/width) · sech(σ y)`.
    SechDerivative { epsilon: f64, sigma: f64, width: f64, x0: f64 },
    /// `ε ∂_x [exp(-(x - x0)²/width²) cos(k (x - x0))] · sech(σ y)`.
    WavePacket { epsilon: f64, sigma: f64, width: f64, wavenumber: f64, x0: f64 },
    /// `ε sech(σ y)`, constant in x. Never admissible for `ε ≠ 0`.
    TransverseSech { epsilon: f64, sigma: f64 },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "default_k")]
    pub k: Vec<u32>,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_tail_ratio")]
    pub tail_ratio: f64,
}

fn default_k() -> Vec<u32> {
    vec![1, 2]
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

fn default_tail_ratio() -> f64 {
    DEFAULT_TAIL_RATIO
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            k: default_k(),
            slack: DEFAULT_SLACK,
            tail_ratio: DEFAULT_TAIL_RATIO,
        }
    }
}

impl AnalysisSpec {
    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            slack: self.slack,
            tail_ratio: self.tail_ratio,
        }
    }
}

/// Step sizes and grid sizes for `convergence-study`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    #[serde(default)]
    pub dt: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
}

/// The file format, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub schema_version: u32,
    pub name: String,
    pub grid: GridSpec,
    pub gamma: i64,
    pub phi_plus: ProfileSpec,
    pub phi_minus: ProfileSpec,
    pub perturbation: PerturbationSpec,
    pub bbm: BbmConfig,
    pub bbmkp: BbmConfig,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        path: path.into(),
        message: message.into(),
    }
}

/// Re-labels a lower-level error as a validation failure at `path`.
fn at(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Validation { .. } => e,
        other => invalid(path, format!("{}: {other}", other.kind())),
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be a positive number, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be finite, got {v}")))
    }
}

fn sech(z: f64) -> f64 {
    1.0 / z.cosh()
}

impl ProfileSpec {
    fn check(&self, path: &str) -> Result<()> {
        match *self {
            ProfileSpec::SolitaryWave { c, x0 } => {
                finite(&format!("{path}.x0"), x0)?;
                if !(c.is_finite() && c > 1.0) {
                    return Err(invalid(&format!("{path}.c"), format!("speed must exceed 1, got {c}")));
                }
            }
            ProfileSpec::Gaussian { amplitude, x0, width } => {
                finite(&format!("{path}.amplitude"), amplitude)?;
                finite(&format!("{path}.x0"), x0)?;
                positive(&format!("{path}.width"), width)?;
            }
            ProfileSpec::Zero => {}
        }
        Ok(())
    }

    /// Samples the profile on `grid`.
    pub fn build(&self, grid: &Grid1D) -> Result<Field1D> {
        match *self {
            ProfileSpec::SolitaryWave { c, x0 } => solitary_wave(grid, c, x0),
            ProfileSpec::Gaussian { amplitude, x0, width } => Field1D::from_fn(grid, |x| {
                let d = grid.periodic_distance(x, x0) / width;
                amplitude * (-d * d).exp()
            }),
            ProfileSpec::Zero => Ok(Field1D::zeros(grid)),
        }
    }
}

impl PerturbationSpec {
    fn check(&self) -> Result<()> {
        let p = "perturbation";
        match *self {
            PerturbationSpec::SechDerivative { epsilon, sigma, width, x0 } => {
                finite(&format!("{p}.epsilon"), epsilon)?;
                positive(&format!("{p}.sigma"), sigma)?;
                positive(&format!("{p}.width"), width)?;
                finite(&format!("{p}.x0"), x0)?;
            }
            PerturbationSpec::WavePacket { epsilon, sigma, width, wavenumber, x0 } => {
                finite(&format!("{p}.epsilon"), epsilon)?;
                positive(&format!("{p}.sigma"), sigma)?;
                positive(&format!("{p}.width"), width)?;
                finite(&format!("{p}.wavenumber"), wavenumber)?;
                finite(&format!("{p}.x0"), x0)?;
            }
            PerturbationSpec::TransverseSech { epsilon, sigma } => {
                finite(&format!("{p}.epsilon"), epsilon)?;
                positive(&format!("{p}.sigma"), sigma)?;
            }
            PerturbationSpec::Zero => {}
        }
        Ok(())
    }

    /// Samples the perturbation on `grid`.
    pub fn build(&self, grid: &Grid2D) -> Result<Field2D> {
        let gx = grid.x();
        match *self {
            PerturbationSpec::SechDerivative { epsilon, sigma, width, x0 } => {
                Field2D::from_fn(grid, |x, y| {
                    let s = gx.periodic_distance(x, x0) / width;
                    -epsilon / width * sech(s) * s.tanh() * sech(sigma * y)
                })
            }
            PerturbationSpec::WavePacket { epsilon, sigma, width, wavenumber: k, x0 } => {
                Field2D::from_fn(grid, |x, y| {
                    let d = gx.periodic_distance(x, x0);
                    let envelope = (-(d / width).powi(2)).exp();
                    let g = envelope * (-2.0 * d / (width * width) * (k * d).cos() - k * (k * d).sin());
                    epsilon * g * sech(sigma * y)
                })
            }
            PerturbationSpec::TransverseSech { epsilon, sigma } => {
                Field2D::from_fn(grid, |_, y| epsilon * sech(sigma * y))
            }
            PerturbationSpec::Zero => Ok(Field2D::zeros(grid)),
        }
    }
}

fn check_boundary_1d(path: &str, f: &Field1D) -> Result<()> {
    // Sample 0 sits on x = -L/2, which is also x = +L/2.
    let edge = f.values()[0].abs();
    if edge > BOUNDARY_TOL {
        return Err(invalid(
            path,
            format!("profile is {edge:e} on the box boundary (limit {BOUNDARY_TOL:e})"),
        ));
    }
    Ok(())
}

fn check_boundary_2d(path: &str, f: &Field2D) -> Result<()> {
    let y_edge = f.row(0)?.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let x_edge = f.rows().fold(0.0_f64, |m, r| m.max(r[0].abs()));
    let edge = y_edge.max(x_edge);
    if edge > BOUNDARY_TOL {
        return Err(invalid(
            path,
            format!("perturbation is {edge:e} on the box boundary (limit {BOUNDARY_TOL:e})"),
        ));
    }
    Ok(())
}

/// A validated scenario with its sampled initial data.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    grid: Grid2D,
    gamma: Gamma,
    phi_plus: Field1D,
    phi_minus: Field1D,
    psi: Field2D,
    profile: TransverseProfile,
}

impl Scenario {
    /// Validates `spec` eagerly and samples the initial data.
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        if spec.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", spec.schema_version),
            ));
        }
        if spec.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let gs = spec.grid;
        let grid = Grid2D::new(gs.nx, gs.ny, gs.lx, gs.ly).map_err(at("grid"))?;
        let gamma = Gamma::try_from(spec.gamma).map_err(|m| invalid("gamma", m))?;

        spec.phi_plus.check("phi_plus")?;
        spec.phi_minus.check("phi_minus")?;
        spec.perturbation.check()?;
        let phi_plus = spec.phi_plus.build(grid.x()).map_err(at("phi_plus"))?;
        let phi_minus = spec.phi_minus.build(grid.x()).map_err(at("phi_minus"))?;
        check_boundary_1d("phi_plus", &phi_plus)?;
        check_boundary_1d("phi_minus", &phi_minus)?;

        // Every row of ψ must carry the same x-mean, which forces equal masses.
        let mass_tol = MeanTolerance::default().absolute_for(phi_plus.max_abs().max(phi_minus.max_abs()));
        let gap = (phi_plus.mean() - phi_minus.mean()).abs();
        if gap > mass_tol {
            return Err(invalid(
                "phi_minus",
                format!("x-mean differs from phi_plus by {gap:e}; the transverse gauge needs equal masses"),
            ));
        }

        let pert = spec.perturbation.build(&grid).map_err(at("perturbation"))?;
        let tol = MeanTolerance::default().absolute_for(pert.max_abs());
        if let Some((row, mean)) = pert
            .x_means()
            .into_iter()
            .enumerate()
            .find(|(_, m)| m.abs() > tol)
        {
            return Err(invalid(
                "perturbation",
                format!("zero-x-mean violated: row {row} has x-mean {mean:e}"),
            ));
        }
        check_boundary_2d("perturbation", &pert)?;

        let profile = TransverseProfile::for_limits(&phi_plus, &phi_minus, grid.ly());
        let psi = blend_field(&grid, &phi_plus, &phi_minus, profile)?.zip_with(&pert, |b, p| b + p)?;

        check_time(&spec, &grid, gamma)?;
        check_analysis(&spec.analysis)?;
        check_convergence(&spec, &grid, gamma)?;

        Ok(Self {
            spec,
            grid,
            gamma,
            phi_plus,
            phi_minus,
            psi,
            profile,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(spec)
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn phi_plus(&self) -> &Field1D {
        &self.phi_plus
    }

    pub fn phi_minus(&self) -> &Field1D {
        &self.phi_minus
    }

    /// The initial BBM-KP state.
    pub fn psi(&self) -> &Field2D {
        &self.psi
    }

    pub fn profile(&self) -> TransverseProfile {
        self.profile
    }

    pub fn bbm_config(&self) -> BbmConfig {
        self.spec.bbm
    }

    pub fn bbmkp_config(&self) -> BbmKpConfig {
        let b = self.spec.bbmkp;
        BbmKpConfig {
            gamma: self.gamma,
            dt: b.dt,
            t_end: b.t_end,
            snapshot_stride: b.snapshot_stride,
            dealias: b.dealias,
        }
    }

    pub fn analysis(&self) -> &AnalysisSpec {
        &self.spec.analysis
    }

    pub fn convergence(&self) -> &ConvergenceSpec {
        &self.spec.convergence
    }
}

fn check_time(spec: &ScenarioSpec, grid: &Grid2D, gamma: Gamma) -> Result<()> {
    spec.bbm.validate().map_err(at("bbm"))?;
    let kp = BbmKpConfig {
        gamma,
        dt: spec.bbmkp.dt,
        t_end: spec.bbmkp.t_end,
        snapshot_stride: spec.bbmkp.snapshot_stride,
        dealias: spec.bbmkp.dealias,
    };
    kp.validate(grid).map_err(at("bbmkp.dt"))?;
    let (a, b) = (&spec.bbm, &spec.bbmkp);
    if a.dt != b.dt || a.t_end != b.t_end || a.snapshot_stride != b.snapshot_stride {
        return Err(invalid(
            "bbm",
            "dt, t_end and snapshot_stride must match bbmkp so snapshots align",
        ));
    }
    Ok(())
}

fn check_analysis(a: &AnalysisSpec) -> Result<()> {
    if a.k.is_empty() {
        return Err(invalid("analysis.k", "must list at least one Sobolev index"));
    }
    if a.k.contains(&0) {
        return Err(invalid("analysis.k", "indices must be >= 1"));
    }
    if !(a.slack.is_finite() && a.slack >= 0.0) {
        return Err(invalid("analysis.slack", format!("must be >= 0, got {}", a.slack)));
    }
    if !(a.tail_ratio.is_finite() && a.tail_ratio > 0.0) {
        return Err(invalid(
            "analysis.tail_ratio",
            format!("must be positive, got {}", a.tail_ratio),
        ));
    }
    Ok(())
}

fn check_convergence(spec: &ScenarioSpec, grid: &Grid2D, gamma: Gamma) -> Result<()> {
    let c = &spec.convergence;
    if !c.dt.is_empty() {
        if c.dt.len() < 3 {
            return Err(invalid("convergence.dt", "an order estimate needs at least 3 step sizes"));
        }
        for &dt in &c.dt {
            BbmKpConfig::new(gamma, dt, spec.bbmkp.t_end, 1)
                .validate(grid)
                .map_err(at("convergence.dt"))?;
        }
    }
    if !c.n.is_empty() {
        if c.n.len() < 2 {
            return Err(invalid("convergence.n", "a resolution study needs at least 2 sizes"));
        }
        let finest = *c.n.iter().max().unwrap_or(&0);
        for &n in &c.n {
            if n == 0 || !finest.is_multiple_of(n) {
                return Err(invalid(
                    "convergence.n",
                    format!("{n} does not divide the finest size {finest}"),
                ));
            }
            let g = Grid2D::new(n, grid.ny(), grid.lx(), grid.ly()).map_err(at("convergence.n"))?;
            BbmKpConfig::new(gamma, spec.bbmkp.dt, spec.bbmkp.t_end, 1)
                .validate(&g)
                .map_err(at("convergence.n"))?;
        }
    }
    Ok(())
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_json_str(&text)
}
