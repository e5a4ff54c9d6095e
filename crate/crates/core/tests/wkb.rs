use std::f64::consts::PI;

use bec_lab_core::diagnostics::{
    energy_density_split, energy_share_sweep, wkb_error_sweep, SweepVariable, WkbReference,
    WkbSweepSetup,
};
use bec_lab_core::eikonal::InitialPhase;
use bec_lab_core::gp::{build_squared_kernel, WaveField};
use bec_lab_core::scattering::{default_step, solve_dirichlet};
use bec_lab_core::spectral::Grid;
use bec_lab_core::{RadialPotential, RegimeParams};
use num_complex::Complex64;

fn amplitude(grid: &Grid) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i)[0];
            Complex64::new(1.0 + 0.5 * x.cos(), 0.2 * x.sin())
        })
        .collect();
    let m: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume();
    raw.into_iter().map(|z| z / m.sqrt()).collect()
}

fn sweep(params: &[RegimeParams], reference: WkbReference) -> bec_lab_core::diagnostics::WkbSweepResult {
    let grid = Grid::new(1, 256, 2.0 * PI).unwrap();
    let a_in = amplitude(&grid);
    let phase = InitialPhase::default().with_mode(0.3, [1.0, 0.0, 0.0], 0.0);
    let v = RadialPotential::constant(1.0, 1.0).unwrap();
    let setup = WkbSweepSetup {
        grid,
        a_in: &a_in,
        phase: &phase,
        potential: &v,
        t: 0.5,
        sobolev_index: 2.0,
    };
    wkb_error_sweep(params, &setup, reference).unwrap()
}

const EPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[test]
fn subcritical_amplitude_error_is_first_order() {
    let params: Vec<_> = EPS
        .iter()
        .map(|&e| RegimeParams::new(1e4, e, 1.0, 0.0, 0.0).unwrap())
        .collect();
    let r = sweep(&params, WkbReference::Eikonal).report;
    assert_eq!(r.sweep_variable, SweepVariable::Eps);
    assert!((r.fitted_slope - 1.0).abs() < 0.2, "{r:?}");
}

#[test]
fn critical_amplitude_error_is_bounded_by_eps_plus_eta() {
    let params: Vec<_> = EPS
        .iter()
        .map(|&e| RegimeParams::new(1e4, e, 1.0, 0.5, 0.0).unwrap())
        .collect();
    let res = sweep(&params, WkbReference::Eikonal);
    assert!((res.c0 - 4.0 * PI).abs() < 1e-12);
    let consts: Vec<f64> = res
        .report
        .errors
        .iter()
        .zip(&EPS)
        .zip(&res.eta)
        .map(|((err, e), eta)| err / (e + eta))
        .collect();
    let lo = consts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = consts.iter().cloned().fold(0.0, f64::max);
    assert!(hi < 2.0 * lo, "{consts:?} {:?}", res.report);
}

#[test]
fn dilute_interaction_error_decays_with_particle_number() {
    let beta = 2.0;
    let params: Vec<_> = [1e1, 1e2, 1e3, 1e4]
        .iter()
        .map(|&n| RegimeParams::new(n, 0.1, beta, 0.0, 0.0).unwrap())
        .collect();
    let r = sweep(&params, WkbReference::FreeEvolution).report;
    assert_eq!(r.sweep_variable, SweepVariable::NScale);
    assert!((r.fitted_slope - (1.0 - beta)).abs() < 0.2, "{r:?}");
}

#[test]
fn energy_shares_approach_the_hard_core_split() {
    let v = RadialPotential::constant(1.0, 1.0).unwrap();
    let rows = energy_share_sweep(&v, &[1.0, 1e-2, 1e-4]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].interaction < w[0].interaction);
        assert!(w[1].residual < w[0].residual);
    }
    let theta = rows[0].b0 / rows[0].a0;
    assert!(theta > 0.0 && theta < 1.0);
    let lo = rows.iter().map(|r| r.constant).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.constant).fold(0.0, f64::max);
    assert!(hi < 2.0 * lo, "{rows:?}");
}

#[test]
fn squared_kernel_main_term_approaches_interaction_share() {
    let v = RadialPotential::constant(1.0, 1.0).unwrap();
    let grid = Grid::new(3, 64, 2.0 * PI).unwrap();
    let field = WaveField::from_fn(grid, 0.5, |x| {
        Complex64::new(1.0 + 0.3 * x[0].cos() * x[1].sin() + 0.2 * x[2].cos(), 0.0)
    })
    .normalized();
    let mut residuals = Vec::new();
    for s in [1.0, 2.0] {
        // β = 1, κ = 1 gives the kernel scale N ε².
        let eps: f64 = 0.5;
        let p = RegimeParams::new(s / (eps * eps), eps, 1.0, 1.0, 0.0).unwrap();
        let sol = solve_dirichlet(&v, p.mu(), default_step(&v, p.mu())).unwrap();
        let k = build_squared_kernel(&p, &v, &sol, &grid).unwrap();
        let split = energy_density_split(&field, &k, &sol, &p).unwrap();
        assert!((k.integral() - split.interaction_share).abs() < 1e-6 * split.interaction_share);
        residuals.push(split.interaction_residual);
    }
    assert!(residuals[1] < 0.5 * residuals[0], "{residuals:?}");
}
