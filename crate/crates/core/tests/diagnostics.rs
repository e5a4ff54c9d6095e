use std::f64::consts::PI;

use bec_lab_core::diagnostics::{
    gronwall_check, modulated_energy, modulated_energy_parts, GronwallOffsets, SlopeReport,
    SweepVariable,
};
use bec_lab_core::euler::{EulerSolver, FluidState};
use bec_lab_core::gp::{EffectiveKernel, EvolveOptions, GpSolver, WaveField};
use bec_lab_core::spectral::{Grid, Spectral};
use num_complex::Complex64;

fn torus(n: usize) -> Grid {
    Grid::new(1, n, 2.0 * PI).unwrap()
}

fn rho0(x: f64) -> f64 {
    (1.0 + 0.3 * x.cos()) / (2.0 * PI)
}

fn u0(x: f64) -> f64 {
    -0.2 * x.sin()
}

fn s0(x: f64) -> f64 {
    0.2 * x.cos()
}

/// `∫ |∇√ρ|²` for the reference density, by quadrature of the closed-form derivative.
fn fisher(grid: &Grid) -> f64 {
    let vals: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i)[0];
            let d = -0.3 * x.sin() / (2.0 * PI);
            d * d / (4.0 * rho0(x))
        })
        .collect();
    grid.integrate(&vals)
}

fn fluid(grid: Grid, c: f64) -> FluidState {
    FluidState::from_fn(grid, c, |x| rho0(x[0]), |x| [u0(x[0]), 0.0, 0.0])
}

fn wkb(grid: Grid, eps: f64, corrector: f64) -> WaveField {
    WaveField::wkb(
        grid,
        eps,
        |x| Complex64::new(rho0(x[0]).sqrt() * (1.0 + corrector * eps * x[0].sin()), 0.0),
        |x| s0(x[0]),
    )
    .normalized()
}

#[test]
fn exact_wkb_data_leave_only_quantum_pressure() {
    let grid = torus(256);
    let c = 1.3;
    for eps in [0.2, 0.05] {
        let m = modulated_energy(&wkb(grid, eps, 0.0), &fluid(grid, c), &EffectiveKernel::delta(c), c)
            .unwrap();
        let expected = 0.5 * eps * eps * fisher(&grid);
        assert!((m - expected).abs() < 1e-12 * expected.max(1e-3), "{m} {expected}");
    }
}

#[test]
fn real_field_against_fluid_at_rest() {
    let grid = torus(256);
    let eps = 0.1;
    let field = WaveField::from_fn(grid, eps, |x| Complex64::new(rho0(x[0]).sqrt(), 0.0));
    let rest = FluidState::from_fn(grid, 1.0, |x| rho0(x[0]), |_| [0.0; 3]);
    let p = modulated_energy_parts(&field, &rest, &EffectiveKernel::delta(2.0), 1.0).unwrap();
    assert!((p.kinetic - 0.5 * eps * eps * fisher(&grid)).abs() < 1e-14);
    assert!(p.potential >= 0.0);
    assert!(p.momentum_l1_err < 1e-14);
}

#[test]
fn initial_modulated_energy_scales_quadratically() {
    let grid = torus(512);
    let c = 1.0;
    let eps = vec![0.2, 0.1, 0.05, 0.025];
    let m: Vec<f64> = eps
        .iter()
        .map(|&e| modulated_energy(&wkb(grid, e, 0.5), &fluid(grid, c), &EffectiveKernel::delta(c), c).unwrap())
        .collect();
    let r = SlopeReport::fit(SweepVariable::Eps, eps, m, 2.0).unwrap();
    assert!((r.fitted_slope - 2.0).abs() < 0.2, "{r:?}");
}

#[test]
fn gronwall_constant_is_uniform_in_eps() {
    let grid = torus(512);
    let c = 1.0;
    let t = 0.5;
    let kernel = EffectiveKernel::delta(c);
    let euler = EulerSolver::new(grid).evolve(&fluid(grid, c), 0.002, t, 16).unwrap();
    let mut growth = Vec::new();
    let mut dens = Vec::new();
    let eps = vec![0.2, 0.1, 0.05, 0.025];
    for &e in &eps {
        let solver = GpSolver::new(Spectral::new(grid), kernel.clone());
        let opts = EvolveOptions {
            dt: 0.05 * e,
            t_final: t,
            snapshots_per_unit_time: 32.0,
        };
        let traj = solver.evolve(&wkb(grid, e, 0.5), &opts).unwrap();
        let rep = gronwall_check(&traj, &euler, &kernel, c, GronwallOffsets::default()).unwrap();
        assert!(rep.momentum_chain_holds());
        assert!(rep.kinetic_chain_holds());
        assert!(rep.m_kin.iter().all(|k| *k >= 0.0));
        for ((m, k), d) in rep.m_values.iter().zip(&rep.m_kin).zip(&rep.density_l2_err) {
            let defect = rep.coercivity_defect[0].max(0.0);
            assert!(*m >= 0.5 * k + 0.5 * c * d * d - defect - 1e-14);
        }
        growth.push(rep.c_growth);
        assert!(rep.c_fit <= rep.c_growth);
        dens.push(*rep.density_l2_err.last().unwrap());
    }
    let lo = growth.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = growth.iter().cloned().fold(0.0, f64::max);
    assert!(hi < 2.0 * lo, "{growth:?}");
    let r = SlopeReport::fit(SweepVariable::Eps, eps, dens, 1.0).unwrap();
    assert!((r.fitted_slope - 1.0).abs() < 0.2, "{r:?}");
}

#[test]
fn desynchronised_trajectories_are_rejected() {
    let grid = torus(64);
    let kernel = EffectiveKernel::delta(1.0);
    let euler = EulerSolver::new(grid).evolve(&fluid(grid, 1.0), 0.01, 0.5, 4).unwrap();
    let traj = GpSolver::new(Spectral::new(grid), kernel.clone())
        .evolve(&wkb(grid, 0.2, 0.0), &EvolveOptions::new(0.01, 0.5))
        .unwrap();
    assert!(gronwall_check(&traj, &euler, &kernel, 1.0, GronwallOffsets::default()).is_err());
}
