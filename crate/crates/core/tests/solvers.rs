use bbmkp_core::bbm::{bbm_invariants, integrate_bbm, solitary_wave, solitary_wave_residual, BbmConfig};
use bbmkp_core::bbmkp::{energy_2d, integrate_bbmkp, BbmKpConfig, Gamma};
use bbmkp_core::spectral::{Field1D, Field2D, Grid1D, Grid2D};
use bbmkp_core::Error;
use proptest::prelude::*;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn solitary_wave_translates_at_its_speed() {
    let grid = Grid1D::new(512, 128.0).unwrap();
    // Slower waves have tails that reach the box edge at L = 128.
    for c in [1.5, 2.0, 3.0] {
        let phi = solitary_wave(&grid, c, 0.0).unwrap();
        let r = solitary_wave_residual(&phi, c);
        assert!(r < 1e-10, "c={c}: residual {r}");
        let t = 4.0;
        let traj = integrate_bbm(&phi, &BbmConfig::new(1e-2, t, usize::MAX)).unwrap();
        let exact = solitary_wave(&grid, c, c * t).unwrap();
        let err = max_diff(traj.last().unwrap().values(), exact.values());
        assert!(err < 1e-6, "c={c}: {err}");
    }
}

#[test]
fn y_independent_data_follow_bbm() {
    let g2 = Grid2D::new(64, 8, 32.0, 16.0).unwrap();
    let phi = Field1D::from_fn(g2.x(), |x| (-(x / 3.0).powi(2)).exp()).unwrap();
    let u = integrate_bbm(&phi, &BbmConfig::new(0.01, 1.0, 20)).unwrap();
    for gamma in [Gamma::Plus, Gamma::Minus] {
        let eta = integrate_bbmkp(&Field2D::extrude(&g2, &phi).unwrap(), &BbmKpConfig::new(gamma, 0.01, 1.0, 20))
            .unwrap();
        assert_eq!(eta.times, u.times);
        for (e, v) in eta.states.iter().zip(&u.states) {
            for row in e.rows() {
                assert!(max_diff(row, v.values()) < 1e-13);
            }
        }
    }
}

#[test]
fn oversized_step_is_rejected_before_stepping() {
    let g2 = Grid2D::new(32, 32, 32.0, 32.0).unwrap();
    let psi = Field2D::zeros(&g2);
    let err = integrate_bbmkp(&psi, &BbmKpConfig::new(Gamma::Plus, 0.5, 1.0, 1)).unwrap_err();
    assert!(matches!(err, Error::StepTooLarge { .. }), "{err:?}");
}

#[test]
fn bbmkp_requires_zero_row_means() {
    let g2 = Grid2D::new(16, 8, 16.0, 16.0).unwrap();
    let psi = Field2D::from_fn(&g2, |x, y| 0.5 + (x * 0.4).sin() * y.cos()).unwrap();
    let err = integrate_bbmkp(&psi, &BbmKpConfig::new(Gamma::Minus, 0.01, 0.1, 1)).unwrap_err();
    assert!(matches!(err, Error::NonZeroXMean { .. }), "{err:?}");
}

fn smooth_line(grid: &Grid1D, a: f64, b: f64, phase: f64) -> Field1D {
    let k = std::f64::consts::TAU / grid.length();
    Field1D::from_fn(grid, |x| a * (k * x + phase).sin() + b * (2.0 * k * x).cos() + 0.2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bbm_conserves_mass_and_energy(a in -1.0..1.0, b in -0.5..0.5, phase in 0.0..6.0) {
        let grid = Grid1D::new(64, 20.0).unwrap();
        let u0 = smooth_line(&grid, a, b, phase);
        let traj = integrate_bbm(&u0, &BbmConfig::new(0.01, 1.0, 25)).unwrap();
        let i0 = bbm_invariants(&u0);
        for u in &traj.states {
            let i = bbm_invariants(u);
            prop_assert!((i.mass - i0.mass).abs() <= 1e-10);
            prop_assert!((i.energy - i0.energy).abs() <= 1e-7 * i0.energy);
        }
    }

    #[test]
    fn bbmkp_conserves_energy(a in -1.0..1.0, b in -0.5..0.5, plus in any::<bool>()) {
        let g2 = Grid2D::new(32, 16, 20.0, 20.0).unwrap();
        let (kx, ky) = (std::f64::consts::TAU / 20.0, std::f64::consts::TAU / 20.0);
        let psi = Field2D::from_fn(&g2, |x, y| a * (kx * x).sin() * (ky * y).cos() + b * (2.0 * kx * x - ky * y).cos())
            .unwrap();
        let gamma = if plus { Gamma::Plus } else { Gamma::Minus };
        let traj = integrate_bbmkp(&psi, &BbmKpConfig::new(gamma, 0.01, 1.0, 25)).unwrap();
        let e0 = energy_2d(&psi);
        for eta in &traj.states {
            prop_assert!((energy_2d(eta) - e0).abs() <= 1e-7 * e0.max(1e-300));
        }
    }
}
