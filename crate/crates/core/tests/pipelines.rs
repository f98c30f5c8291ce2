use std::path::{Path, PathBuf};

use bbmkp_core::harness::{dt_study, run_verify_limit, VerifyOptions};
use bbmkp_core::limit::{w_initial, TransverseProfile};
use bbmkp_core::scenario::{load_scenario, PerturbationSpec, Scenario};
use bbmkp_core::spectral::hk_x_profile;

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn s1() -> Scenario {
    load_scenario(bundled("s1.json")).unwrap()
}

#[test]
fn bundled_scenarios_load() {
    for name in ["s1.json", "s1_gamma_minus.json", "zero.json", "solitary.json"] {
        load_scenario(bundled(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let scn = s1();
    assert_eq!((scn.grid().nx(), scn.grid().ny()), (256, 128));
    assert_eq!((scn.grid().lx(), scn.grid().ly()), (64.0, 64.0));
    assert_eq!(scn.profile(), TransverseProfile::Tanh);
    assert_eq!(scn.bbmkp_config().dt, 5e-4);
}

#[test]
fn s1_initial_comparison_function_is_the_perturbation() {
    let scn = s1();
    let PerturbationSpec::SechDerivative { epsilon, sigma, width, x0 } = scn.spec().perturbation else {
        panic!("S1 perturbation changed");
    };
    let w0 = w_initial(scn.psi(), scn.phi_plus(), scn.phi_minus(), scn.profile()).unwrap();
    let (xs, ys) = (scn.grid().x().points(), scn.grid().y().points());
    let mut worst: f64 = 0.0;
    for (iy, row) in w0.rows().enumerate() {
        for (ix, v) in row.iter().enumerate() {
            let s = (xs[ix] - x0) / width;
            let want = -epsilon / width * s.tanh() / s.cosh() / (sigma * ys[iy]).cosh();
            worst = worst.max((v - want).abs());
        }
    }
    assert!(worst < 1e-14, "{worst}");

    // Far-field rows vanish, and each profile is a multiple of sech(y) peaking at y = 0.
    let (far_plus, far_minus) = scn.profile().edge_rows(scn.grid().y());
    for row in [far_plus, far_minus] {
        assert!(w0.row(row).unwrap().iter().all(|v| v.abs() <= 1e-10));
    }
    let mid = scn.grid().ny() / 2;
    for k in [0, 1, 2] {
        let p = hk_x_profile(&w0, k);
        let peak = p.iter().cloned().fold(0.0, f64::max);
        assert_eq!(p[mid], peak);
        for (iy, &v) in p.iter().enumerate() {
            assert!((v / peak - 1.0 / ys[iy].cosh()).abs() < 1e-12);
        }
    }
}

#[test]
fn solitary_step_study_is_fourth_order() {
    let scn = load_scenario(bundled("solitary.json")).unwrap();
    let rows = dt_study(&scn, &scn.convergence().dt).unwrap();
    for solver in ["bbm", "bbmkp"] {
        let orders: Vec<f64> = rows.iter().filter(|r| r.solver == solver).filter_map(|r| r.order).collect();
        assert_eq!(orders.len(), 1, "{solver}");
        assert!((3.7..4.3).contains(&orders[0]), "{solver}: order {}", orders[0]);
    }
}

#[test]
fn zero_scenario_passes_trivially() {
    let scn = load_scenario(bundled("zero.json")).unwrap();
    let out = run_verify_limit(&scn, &VerifyOptions::default()).unwrap();
    assert!(out.pass());
    assert_eq!(out.report.verdict.bound_violations, 0);
    assert!(out.report.rows.iter().all(|r| r.w_norm == 0.0 && r.bound == 0.0));
}
