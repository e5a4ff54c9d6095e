use std::f64::consts::PI;

use bec_lab_core::gp::WaveField;
use bec_lab_core::pair::{
    build_pair_kernel, hs_scaling_sweep, kinetic_correction_check, kinetic_correction_sweep,
    neumann_profile, sample_pairs, PairProfile,
};
use bec_lab_core::scattering::{default_step, solve_dirichlet, NeumannGroundState};
use bec_lab_core::spectral::Grid;
use bec_lab_core::{PairError, RadialPotential, RegimeParams};
use num_complex::Complex64;

fn potential() -> RadialPotential {
    RadialPotential::constant(1.0, 1.0).unwrap()
}

/// GP scaling with the box radius held at `l`: `N = l / ε⁶`.
fn gp_params(eps: f64, l: f64) -> RegimeParams {
    RegimeParams::new(l / eps.powi(6), eps, 1.0, 1.0, 0.0).unwrap()
}

/// `4π ∫ r² F(r) dr` on `[0, L]` by a fine trapezoid rule on the interpolated profile.
fn radial_moment(ngs: &NeumannGroundState, f: impl Fn(f64) -> f64) -> f64 {
    let n = 400_000;
    let h = ngs.l / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let r = i as f64 * h;
        let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += wgt * r * r * f(r);
    }
    4.0 * PI * acc * h
}

fn uniform(grid: Grid, eps: f64) -> WaveField {
    let vol = grid.box_len.powi(3);
    WaveField::from_fn(grid, eps, |_| Complex64::new(vol.powf(-0.5), 0.0))
}

fn smooth(grid: Grid, eps: f64) -> WaveField {
    let k = 2.0 * PI / grid.box_len;
    WaveField::from_fn(grid, eps, |x| {
        Complex64::new(
            1.0 + 0.3 * (k * x[0]).cos() * (k * x[1]).sin(),
            0.2 * (k * x[2]).cos(),
        )
    })
    .normalized()
}

#[test]
fn uniform_condensate_norms_match_radial_moments() {
    let v = potential();
    let p = gp_params(0.5, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let phi = uniform(grid, p.eps);
    let k = build_pair_kernel(PairProfile::Neumann(&ngs), &phi, &p).unwrap();
    let (hs, grad, sup) = k.norms();

    let s = p.scale();
    let vol = grid.box_len.powi(3);
    let w2 = radial_moment(&ngs, |r| (1.0 - ngs.f_at(r)).powi(2));
    let dw2 = radial_moment(&ngs, |r| ngs.df_at(r).powi(2));
    let hs_exact = p.n * (w2 / s.powi(3) / vol).sqrt();
    let grad_exact = p.n * p.eps * s * (dw2 / s.powi(3) / vol).sqrt();
    let sup_exact = p.n / vol * (w2 / s.powi(3)).sqrt();
    assert!((hs - hs_exact).abs() < 1e-6 * hs_exact, "{hs} {hs_exact}");
    assert!((grad - grad_exact).abs() < 1e-6 * grad_exact, "{grad} {grad_exact}");
    assert!((sup - sup_exact).abs() < 1e-6 * sup_exact, "{sup} {sup_exact}");
}

#[test]
fn uniform_condensate_kinetic_residual_is_the_profile_gap() {
    let v = potential();
    let p = gp_params(0.5, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let sol = solve_dirichlet(&v, p.mu(), default_step(&v, p.mu())).unwrap();
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let k = build_pair_kernel(PairProfile::Neumann(&ngs), &uniform(grid, p.eps), &p).unwrap();
    let c = kinetic_correction_check(&k, &p, &sol);
    let dw2 = radial_moment(&ngs, |r| ngs.df_at(r).powi(2)) / (4.0 * PI);
    let vol = grid.box_len.powi(3);
    let exact = 4.0 * PI * (dw2 - sol.b0).abs() / vol;
    assert!((c.residual - exact).abs() < 1e-6 * exact, "{c:?} {exact}");
    assert!((c.gradient_gap - (dw2 - sol.b0)).abs() < 1e-6 * c.gradient_gap.abs());
}

#[test]
fn vanishing_profile_gives_zero_norms() {
    let v = RadialPotential::constant(0.0, 1.0).unwrap();
    let p = gp_params(0.5, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let k = build_pair_kernel(PairProfile::Neumann(&ngs), &smooth(grid, p.eps), &p).unwrap();
    let (hs, grad, sup) = k.norms();
    // Square roots of quadratic forms: rounding in the form shows up at its square root.
    assert!(hs < 1e-7 && grad < 1e-7 && sup < 1e-7, "{hs} {grad} {sup}");
}

#[test]
fn kernel_is_symmetric_and_non_positive_for_positive_fields() {
    let v = potential();
    let p = gp_params(0.75, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let grid = Grid::new(3, 16, 1.0).unwrap();
    let phi = WaveField::from_fn(grid, p.eps, |x| {
        Complex64::new(1.0 + 0.4 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[2]).sin(), 0.0)
    })
    .normalized();
    let k = build_pair_kernel(PairProfile::Neumann(&ngs), &phi, &p).unwrap();
    let pairs = sample_pairs(&grid, 97, &[[0.05, 0.02, -0.1], [0.2, 0.0, 0.1], [0.4, 0.3, 0.2]]);
    for (x, y) in &pairs {
        let a = k.evaluate(*x, *y);
        let b = k.evaluate(*y, *x);
        assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        assert!(a.re <= 0.0 && a.im.abs() < 1e-14);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let v = potential();
    let p = gp_params(0.75, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let grid = Grid::new(3, 32, 1.0).unwrap();
    let phi = smooth(grid, p.eps);
    let k = build_pair_kernel(PairProfile::Neumann(&ngs), &phi, &p).unwrap();
    let x = [0.3, 0.41, 0.52];
    let y = [0.4, 0.47, 0.5];
    let g = k.gradient_x(x, y);
    let h = 1e-5;
    for a in 0..3 {
        let (mut xp, mut xm) = (x, x);
        xp[a] += h;
        xm[a] -= h;
        let fd = (k.evaluate(xp, y) - k.evaluate(xm, y)) / (2.0 * h);
        assert!((g[a] - fd).norm() < 2e-2 * fd.norm().max(1.0), "{a}: {} {fd}", g[a]);
    }
}

#[test]
fn dense_summation_agrees_with_parseval_contraction() {
    let v = potential();
    let p = gp_params(0.75, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let grid = Grid::new(3, 16, 1.0).unwrap();
    let phi = WaveField::from_fn(grid, p.eps, |x| {
        Complex64::new(1.0 + 0.3 * (2.0 * PI * x[1]).sin(), 0.1 * (2.0 * PI * x[0]).cos())
    })
    .normalized();
    let k = build_pair_kernel(PairProfile::Neumann(&ngs), &phi, &p).unwrap();
    let dense = k.dense_hs_norm().unwrap();
    let (hs, _, _) = k.norms();
    assert!((dense - hs).abs() < 0.05 * hs, "{dense} {hs}");
    let pairs = sample_pairs(&grid, 13, &[[0.01, 0.0, 0.0], [0.1, 0.05, 0.0], [0.5, 0.5, 0.5]]);
    let (c, outside) = k.pointwise_constant(&p, solve_dirichlet(&v, p.mu(), default_step(&v, p.mu())).unwrap().a0, &pairs);
    assert!(c <= 1.0 + 1e-9, "{c}");
    assert!(outside);
}

#[test]
fn dense_mode_rejects_unresolved_support() {
    let v = potential();
    let p = gp_params(0.4, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let grid = Grid::new(3, 16, 1.0).unwrap();
    let k = build_pair_kernel(PairProfile::Neumann(&ngs), &smooth(grid, p.eps), &p).unwrap();
    assert!(matches!(k.dense_hs_norm(), Err(PairError::UnresolvedSupport { .. })));
}

#[test]
fn lower_dimensions_are_rejected() {
    let v = potential();
    let p = gp_params(0.5, 4.0);
    let ngs = neumann_profile(&v, &p).unwrap();
    let grid = Grid::new(2, 16, 1.0).unwrap();
    let phi = WaveField::from_fn(grid, p.eps, |_| Complex64::new(1.0, 0.0));
    assert!(matches!(
        build_pair_kernel(PairProfile::Neumann(&ngs), &phi, &p),
        Err(PairError::UnsupportedDimension(2))
    ));
}

#[test]
fn norm_constants_are_uniform_in_eps() {
    let v = potential();
    let params: Vec<_> = [0.4, 0.2, 0.1].iter().map(|&e| gp_params(e, 4.0)).collect();
    let grid = Grid::new(3, 32, 2.0 * PI).unwrap();
    let sweep = hs_scaling_sweep(&v, &params, &smooth(grid, 0.4)).unwrap();
    let spread = |f: &dyn Fn(&bec_lab_core::pair::PairKernelDiagnostics) -> f64| {
        let c: Vec<f64> = sweep.diagnostics.iter().map(f).collect();
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0);
        hi / lo
    };
    assert!(spread(&|d| d.hs_constant()) < 2.0);
    assert!(spread(&|d| d.grad_constant()) < 2.0);
    assert!(spread(&|d| d.sup_slice_constant()) < 2.0);
}

#[test]
fn kinetic_residual_decays_inversely_with_scale() {
    let v = potential();
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let (report, rows) =
        kinetic_correction_sweep(&v, 0.5, &[64.0, 128.0, 256.0, 512.0], &smooth(grid, 0.5)).unwrap();
    assert!(rows.iter().all(|r| r.residual.is_finite()));
    assert!((report.fitted_slope + 1.0).abs() < 0.2, "{report:?}");
}

#[test]
fn truncated_zero_energy_profile_is_supported() {
    let v = potential();
    let p = gp_params(0.5, 4.0);
    let sol = solve_dirichlet(&v, p.mu(), default_step(&v, p.mu())).unwrap();
    let grid = Grid::new(3, 16, 2.0 * PI).unwrap();
    let phi = uniform(grid, p.eps);
    let k = build_pair_kernel(PairProfile::Dirichlet { sol: &sol, cutoff: 4.0 }, &phi, &p).unwrap();
    let (hs, _, _) = k.norms();
    let h = 1e-5;
    let w2: f64 = (0..400_000)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            r * r * (1.0 - sol.f_at(r)).powi(2)
        })
        .sum::<f64>()
        * h
        * 4.0
        * PI;
    let exact = p.n * (w2 / p.scale().powi(3) / grid.box_len.powi(3)).sqrt();
    assert!((hs - exact).abs() < 1e-6 * exact, "{hs} {exact}");
}
