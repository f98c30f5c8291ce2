//! End-to-end pipelines over a [`Scenario`] and their CSV / JSON outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::bbm::{bbm_invariants, integrate_bbm, BbmConfig, Trajectory1D};
use crate::bbmkp::{energy_2d, integrate_bbmkp, BbmKpConfig, Trajectory2D};
use crate::error::{Error, Result};
use crate::limit::{analyze_limit, w_initial, GronwallConstants, LimitReport, Thresholds};
use crate::scenario::Scenario;
use crate::spectral::{Field1D, Field2D, Grid1D, Grid2D};
use crate::stepping::TimeGrid;

/// The three runs a scenario needs.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub eta: Trajectory2D,
    pub plus: Trajectory1D,
    pub minus: Trajectory1D,
}

/// Runs BBM from `φ^±` and BBM-KP from `ψ`.
pub fn simulate(scn: &Scenario) -> Result<Simulation> {
    let plus = integrate_bbm(scn.phi_plus(), &scn.bbm_config())?;
    let minus = if scn.phi_minus().values() == scn.phi_plus().values() {
        plus.clone()
    } else {
        integrate_bbm(scn.phi_minus(), &scn.bbm_config())?
    };
    let eta = integrate_bbmkp(scn.psi(), &scn.bbmkp_config())?;
    Ok(Simulation { eta, plus, minus })
}

/// Command-line overrides for `verify-limit`.
#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub k: Option<Vec<u32>>,
    pub slack: Option<f64>,
    pub tail_ratio: Option<f64>,
    /// Replace `u⁺` by `2u⁺` after simulation (negative control).
    pub corrupt_uplus: bool,
}

/// Sup-in-time constants on the rows nearest the two y-boundaries at the
/// final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeConstants {
    pub k: u32,
    pub plus: GronwallConstants,
    pub minus: GronwallConstants,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub scenario: String,
    pub corrupt_uplus: bool,
    #[serde(flatten)]
    pub report: LimitReport,
    pub edge_constants: Vec<EdgeConstants>,
    #[serde(skip)]
    pub profiles: Vec<(f64, f64, u32, f64)>,
}

impl VerifyOutcome {
    pub fn pass(&self) -> bool {
        self.report.verdict.pass
    }
}

pub fn run_verify_limit(scn: &Scenario, opts: &VerifyOptions) -> Result<VerifyOutcome> {
    let sim = simulate(scn)?;
    verify_simulation(scn, sim, opts)
}

/// The analysis half of [`run_verify_limit`], on trajectories already computed.
pub fn verify_simulation(scn: &Scenario, mut sim: Simulation, opts: &VerifyOptions) -> Result<VerifyOutcome> {
    let analysis = scn.analysis();
    let k_values = opts.k.clone().unwrap_or_else(|| analysis.k.clone());
    let thresholds = Thresholds {
        slack: opts.slack.unwrap_or(analysis.slack),
        tail_ratio: opts.tail_ratio.unwrap_or(analysis.tail_ratio),
    };
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(Error::InvalidConfig("--k needs a list of indices >= 1".into()));
    }
    if !(thresholds.slack.is_finite() && thresholds.slack >= 0.0) {
        return Err(Error::InvalidConfig(format!("slack must be >= 0, got {}", thresholds.slack)));
    }
    if !(thresholds.tail_ratio.is_finite() && thresholds.tail_ratio > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tail ratio must be positive, got {}",
            thresholds.tail_ratio
        )));
    }
    if opts.corrupt_uplus {
        sim.plus = sim.plus.scaled(2.0);
    }
    let profile = scn.profile();
    let w0 = w_initial(scn.psi(), scn.phi_plus(), scn.phi_minus(), profile)?;
    let result = analyze_limit(&sim.eta, &sim.plus, &sim.minus, &w0, profile, &k_values, thresholds)?;

    let (plus_row, minus_row) = profile.edge_rows(scn.grid().y());
    let (y_plus, y_minus) = (scn.grid().y().point(plus_row), scn.grid().y().point(minus_row));
    let t_final = result.report.verdict.final_time;
    let at_edge = |k: u32, y: f64| {
        result
            .report
            .rows
            .iter()
            .find(|r| r.k == k && r.t == t_final && r.y == y)
            .map(|r| r.constants)
    };
    let edge_constants = k_values
        .iter()
        .filter_map(|&k| {
            Some(EdgeConstants {
                k,
                plus: at_edge(k, y_plus)?,
                minus: at_edge(k, y_minus)?,
            })
        })
        .collect();
    Ok(VerifyOutcome {
        scenario: scn.name().to_string(),
        corrupt_uplus: opts.corrupt_uplus,
        report: result.report,
        edge_constants,
        profiles: result.profiles,
    })
}

#[derive(Serialize)]
struct ProfileRecord {
    t: f64,
    y: f64,
    k: u32,
    w_norm: f64,
}

#[derive(Serialize)]
struct BoundRecord {
    t: f64,
    y: f64,
    k: u32,
    w_norm: f64,
    c_eta: f64,
    c_1: f64,
    c_plus: f64,
    c_minus: f64,
    bound: f64,
    satisfied: bool,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Writes `profile.csv`, `bounds.csv` and `report.json` into `dir`.
pub fn write_verify_outputs(dir: &Path, outcome: &VerifyOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("profile.csv"))?;
    for &(t, y, k, w_norm) in &outcome.profiles {
        w.serialize(ProfileRecord { t, y, k, w_norm })?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("bounds.csv"))?;
    for r in &outcome.report.rows {
        w.serialize(BoundRecord {
            t: r.t,
            y: r.y,
            k: r.k,
            w_norm: r.w_norm,
            c_eta: r.constants.c_eta,
            c_1: r.constants.c_1,
            c_plus: r.constants.c_plus,
            c_minus: r.constants.c_minus,
            bound: r.bound,
            satisfied: r.satisfied,
        })?;
    }
    w.flush()?;
    write_json(&dir.join("report.json"), outcome)
}

#[derive(Serialize)]
struct BbmRecord<'a> {
    branch: &'a str,
    t: f64,
    x: f64,
    u: f64,
}

/// Runs BBM from `φ⁺` and `φ⁻` and writes `bbm.csv`.
pub fn run_simulate_bbm(scn: &Scenario, dir: &Path) -> Result<(Trajectory1D, Trajectory1D)> {
    let plus = integrate_bbm(scn.phi_plus(), &scn.bbm_config())?;
    let minus = integrate_bbm(scn.phi_minus(), &scn.bbm_config())?;
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("bbm.csv"))?;
    let xs = scn.grid().x().points();
    for (branch, traj) in [("plus", &plus), ("minus", &minus)] {
        for (t, u) in traj.times.iter().zip(&traj.states) {
            for (x, v) in xs.iter().zip(u.values()) {
                w.serialize(BbmRecord { branch, t: *t, x: *x, u: *v })?;
            }
        }
    }
    w.flush()?;
    Ok((plus, minus))
}

#[derive(Serialize)]
struct BbmKpRecord {
    t: f64,
    x: f64,
    y: f64,
    eta: f64,
}

/// Runs BBM-KP from `ψ` and writes `bbmkp.csv`.
pub fn run_simulate_bbmkp(scn: &Scenario, dir: &Path) -> Result<Trajectory2D> {
    let traj = integrate_bbmkp(scn.psi(), &scn.bbmkp_config())?;
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("bbmkp.csv"))?;
    let (xs, ys) = (scn.grid().x().points(), scn.grid().y().points());
    for (t, eta) in traj.times.iter().zip(&traj.states) {
        for (iy, row) in eta.rows().enumerate() {
            for (x, v) in xs.iter().zip(row) {
                w.serialize(BbmKpRecord { t: *t, x: *x, y: ys[iy], eta: *v })?;
            }
        }
    }
    w.flush()?;
    Ok(traj)
}

/// One snapshot of the conserved quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantRow {
    pub t: f64,
    pub plus_mass: f64,
    pub plus_energy: f64,
    pub minus_mass: f64,
    pub minus_energy: f64,
    pub eta_mass: f64,
    pub eta_energy: f64,
}

/// Largest departure from the initial value over the run. Masses are
/// absolute, energies relative (absolute when the initial energy is zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftSummary {
    pub plus_mass: f64,
    pub plus_energy: f64,
    pub minus_mass: f64,
    pub minus_energy: f64,
    pub eta_mass: f64,
    pub eta_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyAudit {
    pub scenario: String,
    pub dealias: bool,
    pub drift: DriftSummary,
    #[serde(skip)]
    pub rows: Vec<InvariantRow>,
}

fn mass_2d(eta: &Field2D) -> f64 {
    let g = eta.grid();
    eta.values().iter().sum::<f64>() * g.x().spacing() * g.y().spacing()
}

fn drift(series: impl Iterator<Item = f64>, relative: bool) -> f64 {
    let values: Vec<f64> = series.collect();
    let first = values.first().copied().unwrap_or(0.0);
    let scale = if relative && first != 0.0 { first.abs() } else { 1.0 };
    values.iter().map(|v| (v - first).abs() / scale).fold(0.0, f64::max)
}

pub fn run_energy_audit(scn: &Scenario) -> Result<EnergyAudit> {
    let sim = simulate(scn)?;
    let rows: Vec<InvariantRow> = (0..sim.eta.len())
        .map(|i| {
            let p = bbm_invariants(&sim.plus.states[i]);
            let m = bbm_invariants(&sim.minus.states[i]);
            let eta = &sim.eta.states[i];
            InvariantRow {
                t: sim.eta.times[i],
                plus_mass: p.mass,
                plus_energy: p.energy,
                minus_mass: m.mass,
                minus_energy: m.energy,
                eta_mass: mass_2d(eta),
                eta_energy: energy_2d(eta),
            }
        })
        .collect();
    let d = DriftSummary {
        plus_mass: drift(rows.iter().map(|r| r.plus_mass), false),
        plus_energy: drift(rows.iter().map(|r| r.plus_energy), true),
        minus_mass: drift(rows.iter().map(|r| r.minus_mass), false),
        minus_energy: drift(rows.iter().map(|r| r.minus_energy), true),
        eta_mass: drift(rows.iter().map(|r| r.eta_mass), false),
        eta_energy: drift(rows.iter().map(|r| r.eta_energy), true),
    };
    Ok(EnergyAudit {
        scenario: scn.name().to_string(),
        dealias: scn.bbmkp_config().dealias,
        drift: d,
        rows,
    })
}

/// Writes `invariants.csv` into `dir`.
pub fn write_energy_audit(dir: &Path, audit: &EnergyAudit) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("invariants.csv"))?;
    for r in &audit.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One line of `orders.csv`.
///
/// In a step-size study `error` is the distance to the next finer step and
/// `order` the Richardson estimate from three consecutive steps. In a
/// resolution study `error` is the max distance to the finest grid at the
/// coarse grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRow {
    pub solver: &'static str,
    pub study: &'static str,
    pub value: f64,
    pub error: Option<f64>,
    pub order: Option<f64>,
    pub note: &'static str,
}

fn l2_diff_1d(a: &Field1D, b: &Field1D) -> f64 {
    let h = a.grid().spacing();
    (a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() * h).sqrt()
}

fn l2_diff_2d(a: &Field2D, b: &Field2D) -> f64 {
    let g = a.grid();
    let h = g.x().spacing() * g.y().spacing();
    (a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() * h).sqrt()
}

/// Differences at or below this multiple of the solution size carry no
/// order information.
pub const ORDER_ROUNDOFF: f64 = 1e-12;

/// Richardson orders from solutions at decreasing steps `steps`; `scale`
/// is the size of the solution, used to detect round-off.
fn richardson(solver: &'static str, steps: &[f64], errors: &[f64], scale: f64) -> Vec<OrderRow> {
    let degenerate = errors.iter().all(|&e| e == 0.0);
    let floor = ORDER_ROUNDOFF * scale.max(1.0);
    steps
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let error = errors.get(i).copied();
            let roundoff = |e: Option<&f64>| e.is_some_and(|&e| e <= floor);
            let order = match (errors.get(i), errors.get(i + 1)) {
                (Some(&e0), Some(&e1)) if e0 > floor && e1 > floor => {
                    Some((e0 / e1).ln() / (h / steps[i + 1]).ln())
                }
                _ => None,
            };
            let note = if degenerate {
                "degenerate"
            } else if error.is_none() {
                "finest"
            } else if roundoff(errors.get(i)) || (order.is_none() && roundoff(errors.get(i + 1))) {
                "round-off"
            } else {
                ""
            };
            OrderRow {
                solver,
                study: "dt",
                value: h,
                error,
                order,
                note,
            }
        })
        .collect()
}

fn final_state_1d(phi: &Field1D, dt: f64, t_end: f64, dealias: bool) -> Result<Field1D> {
    let mut cfg = BbmConfig::new(dt, t_end, usize::MAX);
    cfg.dealias = dealias;
    let traj = integrate_bbm(phi, &cfg)?;
    traj.last().cloned().ok_or_else(|| Error::EmptyInput("empty BBM trajectory".into()))
}

fn final_state_2d(psi: &Field2D, cfg: BbmKpConfig) -> Result<Field2D> {
    let traj = integrate_bbmkp(psi, &cfg)?;
    traj.states
        .last()
        .cloned()
        .ok_or_else(|| Error::EmptyInput("empty BBM-KP trajectory".into()))
}

/// Step-size study for both solvers on the scenario data.
pub fn dt_study(scn: &Scenario, dts: &[f64]) -> Result<Vec<OrderRow>> {
    if dts.len() < 3 {
        return Err(Error::InvalidConfig("a step-size study needs at least 3 steps".into()));
    }
    let t_end = scn.bbm_config().t_end;
    let mut steps: Vec<f64> = dts
        .iter()
        .map(|&dt| TimeGrid::new(dt, t_end).map(|g| g.step))
        .collect::<Result<_>>()?;
    steps.sort_by(|a, b| b.total_cmp(a));
    steps.dedup();

    let dealias = scn.bbm_config().dealias;
    let u: Vec<Field1D> = steps
        .iter()
        .map(|&h| final_state_1d(scn.phi_plus(), h, t_end, dealias))
        .collect::<Result<_>>()?;
    let errs: Vec<f64> = u.windows(2).map(|w| l2_diff_1d(&w[0], &w[1])).collect();
    let scale = u.last().map_or(0.0, |f| f.l2_norm());
    let mut rows = richardson("bbm", &steps, &errs, scale);

    let base = scn.bbmkp_config();
    let eta: Vec<Field2D> = steps
        .iter()
        .map(|&h| {
            final_state_2d(
                scn.psi(),
                BbmKpConfig {
                    dt: h,
                    snapshot_stride: usize::MAX,
                    ..base
                },
            )
        })
        .collect::<Result<_>>()?;
    let errs: Vec<f64> = eta.windows(2).map(|w| l2_diff_2d(&w[0], &w[1])).collect();
    let scale = eta.last().map_or(0.0, |f| f.l2_norm());
    rows.extend(richardson("bbmkp", &steps, &errs, scale));
    Ok(rows)
}

/// Resolution study in x for both solvers: each run is compared with the
/// finest one at its own grid points.
pub fn n_study(scn: &Scenario, ns: &[usize]) -> Result<Vec<OrderRow>> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let finest = *ns
        .last()
        .ok_or_else(|| Error::InvalidConfig("empty resolution list".into()))?;
    let spec = scn.spec();
    let (lx, ly, ny) = (scn.grid().lx(), scn.grid().ly(), scn.grid().ny());

    let bbm_cfg = BbmConfig {
        snapshot_stride: usize::MAX,
        ..scn.bbm_config()
    };
    let kp_cfg = BbmKpConfig {
        snapshot_stride: usize::MAX,
        ..scn.bbmkp_config()
    };
    let mut u = Vec::new();
    let mut eta = Vec::new();
    for &n in &ns {
        let gx = Grid1D::new(n, lx)?;
        let g2 = Grid2D::new(n, ny, lx, ly)?;
        let phi_plus = spec.phi_plus.build(&gx)?;
        let phi_minus = spec.phi_minus.build(&gx)?;
        let pert = spec.perturbation.build(&g2)?;
        let psi = crate::limit::blend_field(&g2, &phi_plus, &phi_minus, scn.profile())?
            .zip_with(&pert, |b, p| b + p)?;
        u.push(integrate_bbm(&phi_plus, &bbm_cfg)?.last().cloned());
        eta.push(final_state_2d(&psi, kp_cfg)?);
    }
    let u: Vec<Field1D> = u.into_iter().flatten().collect();
    let (u_ref, eta_ref) = (&u[u.len() - 1], &eta[eta.len() - 1]);

    let mut rows = Vec::new();
    let mut push = |solver: &'static str, errors: Vec<f64>| {
        let degenerate = errors.iter().all(|&e| e == 0.0);
        for (i, &n) in ns.iter().enumerate() {
            let last = i + 1 == ns.len();
            rows.push(OrderRow {
                solver,
                study: "n",
                value: n as f64,
                error: (!last).then(|| errors[i]),
                order: None,
                note: if degenerate {
                    "degenerate"
                } else if last {
                    "finest"
                } else {
                    ""
                },
            });
        }
    };
    let e1: Vec<f64> = ns
        .iter()
        .zip(&u)
        .map(|(&n, ui)| {
            let stride = finest / n;
            ui.values()
                .iter()
                .enumerate()
                .map(|(i, v)| (v - u_ref.values()[i * stride]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    push("bbm", e1);
    let e2: Vec<f64> = ns
        .iter()
        .zip(&eta)
        .map(|(&n, ei)| {
            let stride = finest / n;
            let mut worst: f64 = 0.0;
            for iy in 0..ny {
                for ix in 0..n {
                    worst = worst.max((ei.get(ix, iy) - eta_ref.get(ix * stride, iy)).abs());
                }
            }
            worst
        })
        .collect();
    push("bbmkp", e2);
    Ok(rows)
}

/// Runs every study the scenario lists.
pub fn run_convergence_study(scn: &Scenario) -> Result<Vec<OrderRow>> {
    let c = scn.convergence();
    if c.dt.is_empty() && c.n.is_empty() {
        return Err(Error::InvalidConfig(
            "scenario lists no convergence.dt or convergence.n values".into(),
        ));
    }
    let mut rows = Vec::new();
    if !c.dt.is_empty() {
        rows.extend(dt_study(scn, &c.dt)?);
    }
    if !c.n.is_empty() {
        rows.extend(n_study(scn, &c.n)?);
    }
    Ok(rows)
}

/// Writes `orders.csv` into `dir`.
pub fn write_orders(dir: &Path, rows: &[OrderRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("orders.csv"))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{AnalysisSpec, ConvergenceSpec, GridSpec, PerturbationSpec, ProfileSpec, ScenarioSpec};

    fn zero_scenario() -> Scenario {
        Scenario::new(ScenarioSpec {
            schema_version: 1,
            name: "zero".into(),
            grid: GridSpec { nx: 32, ny: 16, lx: 32.0, ly: 32.0 },
            gamma: -1,
            phi_plus: ProfileSpec::Zero,
            phi_minus: ProfileSpec::Zero,
            perturbation: PerturbationSpec::Zero,
            bbm: BbmConfig::new(0.01, 0.1, 5),
            bbmkp: BbmConfig::new(0.01, 0.1, 5),
            analysis: AnalysisSpec::default(),
            convergence: ConvergenceSpec { dt: vec![0.02, 0.01, 0.005], n: vec![16, 32] },
        })
        .unwrap()
    }

    #[test]
    fn zero_scenario_passes_with_zero_tables() {
        let out = run_verify_limit(&zero_scenario(), &VerifyOptions::default()).unwrap();
        assert!(out.pass());
        assert!(out.profiles.iter().all(|p| p.3 == 0.0));
        assert_eq!(out.edge_constants.len(), 2);
    }

    #[test]
    fn zero_scenario_audit_is_all_zero() {
        let audit = run_energy_audit(&zero_scenario()).unwrap();
        assert_eq!(audit.rows.len(), 3);
        assert!(audit.rows.iter().all(|r| r.plus_energy == 0.0 && r.eta_energy == 0.0));
        assert_eq!(audit.drift.eta_energy, 0.0);
    }

    #[test]
    fn zero_scenario_orders_are_degenerate() {
        let rows = run_convergence_study(&zero_scenario()).unwrap();
        assert_eq!(rows.len(), 3 + 3 + 2 + 2);
        assert!(rows.iter().all(|r| r.note == "degenerate" && r.order.is_none()));
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        let opts = VerifyOptions {
            k: Some(vec![0]),
            ..Default::default()
        };
        let err = run_verify_limit(&zero_scenario(), &opts).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn richardson_recovers_known_order() {
        let steps = [0.4, 0.2, 0.1];
        let errs = [0.4f64.powi(3), 0.2f64.powi(3)];
        let rows = richardson("bbm", &steps, &errs, 1.0);
        assert!((rows[0].order.unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(rows[2].note, "finest");
    }

    #[test]
    fn roundoff_differences_give_no_order() {
        let rows = richardson("bbm", &[0.4, 0.2, 0.1], &[2e-14, 5e-15], 3.0);
        assert!(rows.iter().all(|r| r.order.is_none()));
        assert_eq!(rows[0].note, "round-off");
        assert_eq!(rows[1].note, "round-off");
    }
}
