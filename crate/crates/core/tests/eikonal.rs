use std::f64::consts::PI;

use bec_lab_core::eikonal::{
    caustic_time, hj_residual, solve_amplitude, solve_eikonal, solve_phase, upwind_amplitude,
    InitialPhase,
};
use bec_lab_core::spectral::Grid;
use bec_lab_core::EikonalError;
use num_complex::Complex64;
use proptest::prelude::*;

fn torus(dim: usize, n: usize) -> Grid {
    Grid::new(dim, n, 2.0 * PI).unwrap()
}

fn sample(grid: &Grid, f: impl Fn([f64; 3]) -> Complex64) -> Vec<Complex64> {
    (0..grid.len()).map(|i| f(grid.point(i))).collect()
}

fn periodic_amplitude(x: [f64; 3]) -> Complex64 {
    Complex64::new(1.0 + 0.5 * x[0].cos(), 0.3 * (2.0 * x[0]).sin())
}

fn mass(grid: &Grid, a: &[Complex64]) -> f64 {
    let d: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
    grid.integrate(&d)
}

#[test]
fn linear_phase_is_a_plane_wave() {
    let grid = torus(2, 32);
    let xi = [1.5, -0.5, 0.0];
    let phase = InitialPhase::linear(xi);
    let t = 0.7;
    let pf = solve_phase(&phase, &grid, t).unwrap();
    for i in 0..grid.len() {
        let x = grid.point(i);
        let exact = xi[0] * x[0] + xi[1] * x[1] - 0.5 * t * (xi[0] * xi[0] + xi[1] * xi[1]);
        assert!((pf.phi[i] - exact).abs() < 1e-12);
    }
    assert!(hj_residual(&phase, &grid, t, 0.01).unwrap() < 1e-12);
}

#[test]
fn expanding_quadratic_is_self_similar() {
    let grid = Grid::new(2, 32, 4.0).unwrap();
    let c = [2.0, 2.0, 0.0];
    let phase = InitialPhase::quadratic(1.0, c);
    let t = 1.3;
    let pf = solve_phase(&phase, &grid, t).unwrap();
    for i in 0..grid.len() {
        let x = grid.point(i);
        let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
        assert!((pf.phi[i] - r2 / (2.0 * (1.0 + t))).abs() < 1e-12);
    }
}

#[test]
fn hj_residual_converges_at_second_order() {
    let phase = InitialPhase::linear([0.5, 0.0, 0.0]).with_mode(0.4, [1.0, 0.0, 0.0], 0.2);
    let t = 0.8;
    let coarse = hj_residual(&phase, &torus(1, 64), t, 0.02).unwrap();
    let fine = hj_residual(&phase, &torus(1, 128), t, 0.01).unwrap();
    let order = (coarse / fine).log2();
    assert!((order - 2.0).abs() < 0.2, "{coarse} {fine} {order}");
}

#[test]
fn focusing_phase_stops_at_caustic() {
    let grid = Grid::new(1, 16, 2.0).unwrap();
    let phase = InitialPhase::quadratic(-1.0, [1.0, 0.0, 0.0]);
    assert_eq!(caustic_time(&phase, &grid), 1.0);
    assert!(matches!(
        solve_phase(&phase, &grid, 1.0),
        Err(EikonalError::PastCaustic { .. })
    ));
}

#[test]
fn linear_phase_transports_amplitude() {
    let grid = torus(1, 256);
    let xi = [0.8, 0.0, 0.0];
    let phase = InitialPhase::linear(xi);
    let a_in = sample(&grid, periodic_amplitude);
    let t = 0.9;
    let a = solve_amplitude(&a_in, &grid, &phase, 0.0, t).unwrap();
    let err: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            (a[i] - periodic_amplitude([x[0] - t * xi[0], 0.0, 0.0])).norm_sqr()
        })
        .collect();
    assert!(grid.integrate(&err).sqrt() < 1e-6);
}

#[test]
fn linear_phase_rotation_has_closed_form() {
    let grid = torus(1, 1024);
    let xi = [0.8, 0.0, 0.0];
    let phase = InitialPhase::linear(xi);
    let a_in = sample(&grid, periodic_amplitude);
    let (t, c0) = (0.9, 2.5);
    let a = solve_amplitude(&a_in, &grid, &phase, c0, t).unwrap();
    for i in 0..grid.len() {
        let y = [grid.point(i)[0] - t * xi[0], 0.0, 0.0];
        let a0 = periodic_amplitude(y);
        let exact = a0 * Complex64::from_polar(1.0, -c0 * a0.norm_sqr() * t);
        assert!((a[i] - exact).norm() < 1e-8);
    }
}

#[test]
fn transport_conserves_mass() {
    let grid = torus(1, 256);
    let phase = InitialPhase::linear([0.3, 0.0, 0.0]).with_mode(0.5, [1.0, 0.0, 0.0], 0.0);
    let a_in = sample(&grid, periodic_amplitude);
    let t = 0.5 * caustic_time(&phase, &grid);
    let state = solve_eikonal(&a_in, &grid, &phase, 1.0, t).unwrap();
    assert!((state.mass() - mass(&grid, &a_in)).abs() < 1e-6);
}

#[test]
fn gaussian_under_expanding_quadratic_keeps_mass() {
    let grid = Grid::new(2, 256, 16.0).unwrap();
    let c = [8.0, 8.0, 0.0];
    let phase = InitialPhase::quadratic(0.5, c);
    let a_in = sample(&grid, |x| {
        let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
        Complex64::new((-r2 / 2.0).exp() / PI.sqrt(), 0.0)
    });
    assert!((mass(&grid, &a_in) - 1.0).abs() < 1e-12);
    let state = solve_eikonal(&a_in, &grid, &phase, 3.0, 1.0).unwrap();
    let drift = (state.mass() - mass(&grid, &a_in)).abs();
    assert!(drift < 1e-6, "{drift}");
}

#[test]
fn rotation_preserves_modulus() {
    let grid = torus(2, 32);
    let phase = InitialPhase::linear([1.0, 0.0, 0.0])
        .with_mode(0.3, [1.0, 1.0, 0.0], 0.1)
        .with_mode(0.2, [0.0, 2.0, 0.0], 0.4);
    let a_in = sample(&grid, |x| Complex64::new(1.0 + 0.3 * x[1].sin(), 0.2 * x[0].cos()));
    let t = 0.6 * caustic_time(&phase, &grid);
    let a0 = solve_amplitude(&a_in, &grid, &phase, 0.0, t).unwrap();
    let a1 = solve_amplitude(&a_in, &grid, &phase, 4.0, t).unwrap();
    for (p, q) in a0.iter().zip(&a1) {
        assert!((p.norm() - q.norm()).abs() < 1e-10);
    }
}

#[test]
fn upwind_solver_agrees_at_first_order() {
    let phase = InitialPhase::linear([0.4, 0.0, 0.0]).with_mode(0.3, [1.0, 0.0, 0.0], 0.0);
    let t = 0.5;
    let err = |n: usize| {
        let grid = torus(1, n);
        let a_in = sample(&grid, periodic_amplitude);
        let exact = solve_amplitude(&a_in, &grid, &phase, 1.0, t).unwrap();
        let steps = n;
        let approx = upwind_amplitude(&a_in, &grid, &phase, 1.0, t, steps).unwrap();
        let d: Vec<f64> = exact.iter().zip(&approx).map(|(a, b)| (a - b).norm_sqr()).collect();
        grid.integrate(&d).sqrt()
    };
    let (e1, e2) = (err(64), err(128));
    let order = (e1 / e2).log2();
    assert!(e1 < 0.1);
    assert!((order - 1.0).abs() < 0.25, "{e1} {e2} {order}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_phases_conserve_mass_and_modulus(
        amp in 0.05f64..0.6,
        theta in 0.0f64..6.28,
        xi in -1.0f64..1.0,
        frac in 0.1f64..0.8,
        c0 in 0.0f64..5.0,
    ) {
        let grid = torus(1, 256);
        let phase = InitialPhase::linear([xi, 0.0, 0.0]).with_mode(amp, [1.0, 0.0, 0.0], theta);
        let a_in = sample(&grid, periodic_amplitude);
        let t = frac * caustic_time(&phase, &grid);
        let free = solve_amplitude(&a_in, &grid, &phase, 0.0, t).unwrap();
        let rot = solve_amplitude(&a_in, &grid, &phase, c0, t).unwrap();
        prop_assert!((mass(&grid, &rot) - mass(&grid, &a_in)).abs() < 1e-6);
        for (p, q) in free.iter().zip(&rot) {
            prop_assert!((p.norm() - q.norm()).abs() < 1e-10);
        }
    }
}
