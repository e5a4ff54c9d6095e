//! Experiment subcommands. Each fills an artifact directory and returns the derived
//! parameters recorded in the manifest.

use std::f64::consts::PI;

use bec_lab_core::diagnostics::{
    gronwall_check, modulated_energy, wkb_error_sweep, GronwallOffsets, SlopeReport, SweepVariable,
    WkbReference, WkbSweepSetup,
};
use bec_lab_core::eikonal::{caustic_time, hj_residual, solve_eikonal};
use bec_lab_core::euler::{EulerSolver, FluidState};
use bec_lab_core::gp::{
    build_effective_kernel, CorrelationProfile, EffectiveKernel, EvolveOptions, GpSolver, KernelMode,
    WaveField,
};
use bec_lab_core::pair::{hs_scaling_sweep, kinetic_correction_sweep};
use bec_lab_core::scattering::{
    default_step, eta_rate_fit, potential_moment, scattering_length_by_integral, solve_dirichlet,
    solve_neumann, RateFit,
};
use bec_lab_core::spectral::{Grid, Spectral};
use bec_lab_core::{capacity, RadialPotential};
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::*;
use crate::error::{LabError, LabResult};
use crate::output::{Artifacts, Plot, Table};
use crate::row;

pub fn scatter(cfg: &ScatterConfig, art: &mut Artifacts) -> LabResult<Value> {
    let v = potential(&cfg.potential)?;
    let mus = cfg.mu.values()?;
    if let Some(h) = cfg.step {
        positive("step", h)?;
    }
    let sols = mus
        .par_iter()
        .map(|&mu| {
            let sol = solve_dirichlet(&v, mu, cfg.step.unwrap_or_else(|| default_step(&v, mu)))
                .map_err(LabError::solver)?;
            let a_int = scattering_length_by_integral(&sol, &v).map_err(LabError::solver)?;
            Ok((sol, a_int))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let c0 = capacity(&v);
    let mut t = Table::new(&["mu", "a0", "a0_integral", "b0", "b0_gradient", "c1", "capacity", "eta"]);
    for (sol, a_int) in &sols {
        t.push(row![sol.mu, sol.a0, *a_int, sol.b0, sol.b0_by_gradient(), sol.c1, c0, c0 - sol.a0]);
    }
    art.write_csv("scatter.csv", &t)?;
    art.write_plot(&Plot::new("scatter", "mu", "length").log(true, false)
        .curve("scatter.csv", 1, 2, "a0")
        .curve("scatter.csv", 1, 4, "b0"))?;
    if cfg.profiles {
        let mut plot = Plot::new("profiles", "r", "f");
        for (i, (sol, _)) in sols.iter().enumerate() {
            let mut p = Table::new(&["r", "m", "f", "df"]);
            for j in 0..sol.r_grid.len() {
                p.push(row![sol.r_grid[j], sol.m_values[j], sol.f(j), sol.df(j)]);
            }
            let name = format!("profile_{i:02}.csv");
            art.write_csv(&name, &p)?;
            plot = plot.curve(&name, 1, 3, &format!("mu={:e}", sol.mu));
        }
        art.write_plot(&plot)?;
    }
    Ok(json!({ "capacity": c0, "points": sols.len() }))
}

pub fn neumann(cfg: &NeumannConfig, art: &mut Artifacts) -> LabResult<Value> {
    let v = potential(&cfg.potential)?;
    let mu = positive("mu", cfg.mu)?;
    let h = cfg.step.unwrap_or_else(|| default_step(&v, mu));
    let a0 = solve_dirichlet(&v, mu, h).map_err(LabError::solver)?.a0;
    let states = cfg
        .box_radii
        .par_iter()
        .map(|&l| solve_neumann(&v, mu, l, h, cfg.energy_tol).map_err(LabError::solver))
        .collect::<LabResult<Vec<_>>>()?;
    let mut t = Table::new(&["L", "energy", "ratio", "gradient_energy", "moment_1", "moment_2"]);
    for s in &states {
        let ratio = s.energy * s.l.powi(3) / (3.0 * mu * a0);
        t.push(row![s.l, s.energy, ratio, s.gradient_energy(), potential_moment(s, &v, 1), potential_moment(s, &v, 2)]);
    }
    art.write_csv("neumann.csv", &t)?;
    art.write_plot(&Plot::new("neumann_ratio", "L", "E L^3 / (3 mu a0)").log(true, false).curve("neumann.csv", 1, 3, "ratio"))?;
    if cfg.profiles {
        let mut plot = Plot::new("neumann_profiles", "r", "f_L");
        for (i, s) in states.iter().enumerate() {
            let mut p = Table::new(&["r", "m", "f", "df"]);
            for j in 0..s.r_grid.len() {
                p.push(row![s.r_grid[j], s.m_values[j], s.f(j), s.df(j)]);
            }
            let name = format!("neumann_profile_{i:02}.csv");
            art.write_csv(&name, &p)?;
            plot = plot.curve(&name, 1, 3, &format!("L={}", s.l));
        }
        art.write_plot(&plot)?;
    }
    Ok(json!({ "a0": a0, "step": h }))
}

/// Step potential for `n = 0`, vanishing profile of order `n` otherwise.
pub fn family(v0: f64, r0: f64) -> impl Fn(f64) -> RadialPotential + Sync {
    move |n| {
        if n == 0.0 {
            RadialPotential::constant(v0, r0)
        } else {
            RadialPotential::vanishing(v0, r0, n)
        }
        .expect("validated family parameters")
    }
}

pub fn rate(cfg: &RateConfig, art: &mut Artifacts) -> LabResult<Value> {
    positive("v0", cfg.v0)?;
    positive("R0", cfg.r0)?;
    if cfg.n.is_empty() || cfg.n.iter().any(|n| !(*n >= 0.0)) {
        return Err(LabError::config("n must list non-negative orders"));
    }
    for &n in &cfg.n {
        if n != 0.0 {
            RadialPotential::vanishing(cfg.v0, cfg.r0, n).map_err(|e| LabError::config(e.to_string()))?;
        }
    }
    let mus = cfg.mu.values()?;
    let fam = family(cfg.v0, cfg.r0);
    let fits: Vec<RateFit> = cfg
        .n
        .par_iter()
        .map(|&n| eta_rate_fit(&fam, n, &mus).map_err(LabError::solver))
        .collect::<LabResult<_>>()?;
    let mut t = Table::new(&["n", "mu", "eta", "used"]);
    let mut plot = Plot::new("rate", "mu", "eta").log(true, true);
    let mut summary = Vec::new();
    for (&n, fit) in cfg.n.iter().zip(&fits) {
        for ((mu, eta), used) in fit.mu.iter().zip(&fit.eta).zip(&fit.used) {
            t.push(row![n, *mu, *eta, *used]);
        }
        summary.push(json!({
            "n": n,
            "slope": fit.slope,
            "expected_slope": RateFit::expected_slope(n),
            "intercept": fit.intercept,
            "residual": fit.residual,
            "points_used": fit.used.iter().filter(|u| **u).count(),
        }));
        plot = plot.curve("rate.csv", 2, 3, &format!("n={n}"));
    }
    art.write_csv("rate.csv", &t)?;
    art.write_plot(&plot)?;
    Ok(json!({ "fits": summary }))
}

/// Counter-based noise stream: node `i` always receives the `i`-th draw of the seeded generator.
fn noise_factors(seed: u64, len: usize, amplitude: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            1.0 + amplitude * (2.0 * u - 1.0)
        })
        .collect()
}

pub fn initial_field(grid: Grid, eps: f64, init: &InitialField, noise: Option<Noise>) -> LabResult<WaveField> {
    positive("eps", eps)?;
    let mut f = match init {
        InitialField::PlaneWave { xi } => WaveField::from_fn(grid, eps, |x| {
            Complex64::from_polar(1.0, (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]) / eps)
        }),
        InitialField::Gaussian { center, sigma, momentum } => {
            positive("sigma", *sigma)?;
            WaveField::from_fn(grid, eps, |x| {
                let (mut r2, mut px) = (0.0, 0.0);
                for a in 0..grid.dim {
                    r2 += (x[a] - center[a]).powi(2);
                    px += momentum[a] * (x[a] - center[a]);
                }
                Complex64::from_polar((-r2 / (2.0 * sigma * sigma)).exp(), px / eps)
            })
        }
        InitialField::Uniform => WaveField::from_fn(grid, eps, |_| Complex64::new(1.0, 0.0)),
        InitialField::Wkb { density_amp, phase_amp } => {
            if density_amp.abs() >= 1.0 {
                return Err(LabError::config("density_amp must lie in (-1, 1)"));
            }
            let k = 2.0 * PI / grid.box_len;
            WaveField::wkb(
                grid,
                eps,
                |x| Complex64::new((1.0 + density_amp * (k * x[0]).cos()).sqrt(), 0.0),
                |x| phase_amp * (k * x[0]).sin(),
            )
        }
    };
    if let Some(n) = noise {
        for (z, s) in f.values.iter_mut().zip(noise_factors(n.seed, grid.len(), n.amplitude)) {
            *z *= s;
        }
    }
    if !(f.mass() > 0.0) {
        return Err(LabError::config("initial field vanishes on the grid"));
    }
    Ok(f.normalized())
}

pub fn kernel(spec: &KernelSpec, grid: &Grid) -> LabResult<(EffectiveKernel, Value)> {
    Ok(match spec {
        KernelSpec::Zero => (EffectiveKernel::zero(), json!({ "g": 0.0 })),
        KernelSpec::Delta { g } => {
            if !(*g >= 0.0) {
                return Err(LabError::config("g must be non-negative"));
            }
            (EffectiveKernel::delta(*g), json!({ "g": g }))
        }
        KernelSpec::Regime { potential: p, params, scaled } => {
            let v = potential(p)?;
            let params = params.build()?;
            let mu = params.mu();
            let sol = solve_dirichlet(&v, mu, default_step(&v, mu)).map_err(LabError::solver)?;
            let derived = json!({
                "regime": format!("{:?}", params.regime()),
                "mu": mu,
                "mu_tilde": params.mu_tilde(),
                "scale": params.scale(),
                "box_radius": params.box_radius(),
                "a0": sol.a0,
            });
            let k = if *scaled {
                let ngs;
                let profile = if params.box_radius() >= 2.0 * v.support_radius() {
                    ngs = solve_neumann(&v, mu, params.box_radius(), default_step(&v, mu), 1e-12)
                        .map_err(LabError::solver)?;
                    CorrelationProfile::Neumann(&ngs)
                } else {
                    CorrelationProfile::Dirichlet(&sol)
                };
                build_effective_kernel(&params, &v, profile, grid, KernelMode::Scaled).map_err(LabError::solver)?
            } else {
                EffectiveKernel::delta_for(&params, &sol).map_err(LabError::solver)?
            };
            let mut d = derived;
            d["g"] = json!(k.integral());
            (k, d)
        }
    })
}

/// Nodes on the first axis through the origin.
fn axis_nodes(grid: &Grid) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| {
            let m = grid.multi_index(i);
            m[1] == 0 && m[2] == 0
        })
        .collect()
}

pub fn gp_run(cfg: &GpRunConfig, art: &mut Artifacts) -> LabResult<Value> {
    let grid = cfg.grid.build()?;
    positive("dt", cfg.dt)?;
    positive("T", cfg.t_final)?;
    positive("snapshots_per_unit_time", cfg.snapshots_per_unit_time)?;
    let field = initial_field(grid, cfg.eps, &cfg.initial, cfg.noise)?;
    let (k, mut derived) = kernel(&cfg.kernel, &grid)?;
    let solver = GpSolver::new(Spectral::new(grid), k);
    let opts = EvolveOptions {
        dt: cfg.dt,
        t_final: cfg.t_final,
        snapshots_per_unit_time: cfg.snapshots_per_unit_time,
    };
    let traj = solver.evolve(&field, &opts).map_err(LabError::solver)?;
    let (m0, e0) = (traj.mass[0], traj.energy[0]);
    let mut t = Table::new(&["t", "mass", "energy", "mass_drift", "energy_drift"]);
    for ((time, m), e) in traj.times.iter().zip(&traj.mass).zip(&traj.energy) {
        t.push(row![*time, *m, *e, (m - m0).abs(), (e - e0).abs() / e0.abs().max(1e-300)]);
    }
    art.write_csv("gp_run.csv", &t)?;
    let last = traj.final_field();
    let mut s = Table::new(&["x", "rho", "re", "im"]);
    for i in axis_nodes(&grid) {
        let z = last.values[i];
        s.push(row![grid.point(i)[0], z.norm_sqr(), z.re, z.im]);
    }
    art.write_csv("gp_final_slice.csv", &s)?;
    art.write_plot(&Plot::new("gp_drift", "t", "drift").log(false, true)
        .curve("gp_run.csv", 1, 4, "mass")
        .curve("gp_run.csv", 1, 5, "energy"))?;
    art.write_plot(&Plot::new("gp_density", "x", "rho").curve("gp_final_slice.csv", 1, 2, "final"))?;
    derived["dt"] = json!(traj.dt);
    derived["max_mass_drift"] = json!(traj.max_mass_drift());
    derived["max_relative_energy_drift"] = json!(traj.max_relative_energy_drift());
    if let Some(n) = cfg.noise {
        derived["noise"] = json!({ "generator": "chacha8", "seed": n.seed, "amplitude": n.amplitude });
    }
    Ok(derived)
}

pub fn euler_run(cfg: &EulerRunConfig, art: &mut Artifacts) -> LabResult<Value> {
    let grid = cfg.grid.build()?;
    positive("c", cfg.c)?;
    positive("dt", cfg.dt)?;
    positive("T", cfg.t_final)?;
    if cfg.density_amp.abs() >= 1.0 || cfg.snapshots == 0 {
        return Err(LabError::config("density_amp must lie in (-1, 1) and snapshots must be positive"));
    }
    let vol = grid.volume();
    let k = cfg.wavenumber * 2.0 * PI / grid.box_len;
    let state = FluidState::from_fn(
        grid,
        cfg.c,
        |x| (1.0 + cfg.density_amp * (k * x[0]).cos()) / vol,
        |x| [cfg.velocity_amp * (k * x[0]).sin() + cfg.drift, 0.0, 0.0],
    );
    let traj = EulerSolver::new(grid)
        .evolve(&state, cfg.dt, cfg.t_final, cfg.snapshots)
        .map_err(LabError::solver)?;
    let mut t = Table::new(&["t", "mass", "energy", "momentum_x", "cfl"]);
    for i in 0..traj.times.len() {
        t.push(row![traj.times[i], traj.mass[i], traj.energy[i], traj.momentum[i][0], traj.cfl[i]]);
    }
    art.write_csv("euler_run.csv", &t)?;
    let last = traj.final_state();
    let mut s = Table::new(&["x", "rho", "u"]);
    for i in axis_nodes(&grid) {
        s.push(row![grid.point(i)[0], last.rho[i], last.u[0][i]]);
    }
    art.write_csv("euler_final_slice.csv", &s)?;
    art.write_plot(&Plot::new("euler_energy", "t", "energy").curve("euler_run.csv", 1, 3, "energy"))?;
    art.write_plot(&Plot::new("euler_profile", "x", "value")
        .curve("euler_final_slice.csv", 1, 2, "rho")
        .curve("euler_final_slice.csv", 1, 3, "u"))?;
    Ok(json!({
        "dt": traj.dt,
        "status": serde_json::to_value(traj.status).unwrap_or(Value::Null),
        "max_relative_energy_drift": traj.max_relative_energy_drift(),
    }))
}

/// `1 + a cos x₁ + i b sin x₁` on the first axis, normalized.
pub fn amplitude(grid: &Grid, ab: [f64; 2]) -> Vec<Complex64> {
    let k = 2.0 * PI / grid.box_len;
    let raw: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i)[0];
            Complex64::new(1.0 + ab[0] * (k * x).cos(), ab[1] * (k * x).sin())
        })
        .collect();
    let m: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume();
    raw.into_iter().map(|z| z / m.sqrt()).collect()
}

pub fn eikonal_run(cfg: &EikonalRunConfig, art: &mut Artifacts) -> LabResult<Value> {
    let grid = cfg.grid.build()?;
    positive("hj_dt", cfg.hj_dt)?;
    if cfg.times.is_empty() || cfg.times.iter().any(|t| !(*t >= 0.0)) {
        return Err(LabError::config("times must be non-empty and non-negative"));
    }
    let a_in = amplitude(&grid, cfg.amplitude);
    let tc = caustic_time(&cfg.phase, &grid);
    let rows = cfg
        .times
        .par_iter()
        .map(|&t| {
            let st = solve_eikonal(&a_in, &grid, &cfg.phase, cfg.c0, t).map_err(LabError::solver)?;
            let hj = if t > cfg.hj_dt && t + cfg.hj_dt < tc {
                hj_residual(&cfg.phase, &grid, t, cfg.hj_dt).map_err(LabError::solver)?
            } else {
                f64::NAN
            };
            Ok((t, st, hj))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let m0: f64 = grid.integrate(&a_in.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
    let mut t = Table::new(&["t", "caustic_time", "mass", "mass_drift", "hj_residual"]);
    for (time, st, hj) in &rows {
        t.push(row![*time, tc, st.mass(), (st.mass() - m0).abs(), *hj]);
    }
    art.write_csv("eikonal.csv", &t)?;
    let (_, last, _) = rows.last().expect("non-empty times");
    let mut s = Table::new(&["x", "abs_a", "arg_a", "phase"]);
    for i in axis_nodes(&grid) {
        s.push(row![grid.point(i)[0], last.a[i].norm(), last.a[i].arg(), last.phi_eik[i]]);
    }
    art.write_csv("eikonal_final_slice.csv", &s)?;
    art.write_plot(&Plot::new("eikonal_profile", "x", "value")
        .curve("eikonal_final_slice.csv", 1, 2, "|a|")
        .curve("eikonal_final_slice.csv", 1, 4, "phase"))?;
    Ok(json!({ "caustic_time": if tc.is_finite() { json!(tc) } else { json!("none") } }))
}

/// Density `(1 + 0.3 cos x)/2π`, velocity `-0.2 sin x` and phase `0.2 cos x` on a periodic line.
pub mod smooth_flow {
    use super::*;

    pub fn rho(x: f64, len: f64) -> f64 {
        let k = 2.0 * PI / len;
        (1.0 + 0.3 * (k * x).cos()) / len
    }

    pub fn fluid(grid: Grid, c: f64) -> FluidState {
        let k = 2.0 * PI / grid.box_len;
        FluidState::from_fn(grid, c, |x| rho(x[0], grid.box_len), |x| [-0.2 * (k * x[0]).sin(), 0.0, 0.0])
    }

    pub fn wkb(grid: Grid, eps: f64, corrector: f64) -> WaveField {
        let k = 2.0 * PI / grid.box_len;
        WaveField::wkb(
            grid,
            eps,
            |x| Complex64::new(rho(x[0], grid.box_len).sqrt() * (1.0 + corrector * eps * (k * x[0]).sin()), 0.0),
            |x| 0.2 / k * (k * x[0]).cos(),
        )
        .normalized()
    }
}

#[derive(Debug, Clone)]
pub struct ModEnergyRun {
    pub eps: f64,
    pub m0: f64,
    pub report: bec_lab_core::diagnostics::ModulatedEnergyReport,
}

pub fn modenergy_runs(cfg: &ModEnergyConfig) -> LabResult<Vec<ModEnergyRun>> {
    let grid = cfg.grid.build()?;
    if grid.dim != 1 {
        return Err(LabError::config("modenergy runs on a one-dimensional grid"));
    }
    positive("c", cfg.c)?;
    positive("T", cfg.t_final)?;
    positive("euler_dt", cfg.euler_dt)?;
    positive("gp_dt_factor", cfg.gp_dt_factor)?;
    if cfg.eps.len() < 2 || cfg.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(LabError::config("eps must list at least two positive values"));
    }
    let kernel = EffectiveKernel::delta(cfg.c);
    let snaps = (cfg.t_final * 32.0).round().max(1.0) as usize;
    let euler = EulerSolver::new(grid)
        .evolve(&smooth_flow::fluid(grid, cfg.c), cfg.euler_dt, cfg.t_final, snaps)
        .map_err(LabError::solver)?;
    cfg.eps
        .par_iter()
        .map(|&e| {
            let f0 = smooth_flow::wkb(grid, e, cfg.corrector);
            let m0 = modulated_energy(&f0, &euler.states[0], &kernel, cfg.c).map_err(LabError::solver)?;
            let solver = GpSolver::new(Spectral::new(grid), kernel.clone());
            let opts = EvolveOptions {
                dt: cfg.gp_dt_factor * e,
                t_final: cfg.t_final,
                snapshots_per_unit_time: snaps as f64 / cfg.t_final,
            };
            let traj = solver.evolve(&f0, &opts).map_err(LabError::solver)?;
            let report = gronwall_check(&traj, &euler, &kernel, cfg.c, GronwallOffsets::default())
                .map_err(LabError::solver)?;
            Ok(ModEnergyRun { eps: e, m0, report })
        })
        .collect()
}

pub fn modenergy(cfg: &ModEnergyConfig, art: &mut Artifacts) -> LabResult<Value> {
    let runs = modenergy_runs(cfg)?;
    let (tables, derived) = modenergy_tables(&runs)?;
    for (name, t) in &tables {
        art.write_csv(name, t)?;
    }
    art.write_plot(&Plot::new("modenergy_summary", "eps", "value").log(true, true)
        .curve("modenergy_summary.csv", 1, 2, "M(0)")
        .curve("modenergy_summary.csv", 1, 5, "density error at T"))?;
    Ok(derived)
}

pub fn modenergy_tables(runs: &[ModEnergyRun]) -> LabResult<(Vec<(String, Table)>, Value)> {
    let mut series = Table::new(&["eps", "t", "m", "m_kin", "m_pot", "density_l2_err"]);
    let mut summary = Table::new(&["eps", "m0", "c_fit", "c_growth", "density_l2_err_final"]);
    for r in runs {
        let rep = &r.report;
        for i in 0..rep.t_grid.len() {
            series.push(row![r.eps, rep.t_grid[i], rep.m_values[i], rep.m_kin[i], rep.m_pot[i], rep.density_l2_err[i]]);
        }
        summary.push(row![r.eps, r.m0, rep.c_fit, rep.c_growth, *rep.density_l2_err.last().unwrap_or(&f64::NAN)]);
    }
    let eps: Vec<f64> = runs.iter().map(|r| r.eps).collect();
    let m0 = SlopeReport::fit(SweepVariable::Eps, eps.clone(), runs.iter().map(|r| r.m0).collect(), 2.0)
        .map_err(LabError::solver)?;
    let dens = SlopeReport::fit(
        SweepVariable::Eps,
        eps,
        runs.iter().map(|r| *r.report.density_l2_err.last().unwrap_or(&0.0)).collect(),
        1.0,
    )
    .map_err(LabError::solver)?;
    let growth: Vec<f64> = runs.iter().map(|r| r.report.c_growth).collect();
    let derived = json!({
        "m0_slope": m0.fitted_slope,
        "density_slope": dens.fitted_slope,
        "c_growth_spread": spread(&growth),
        "c_fit": runs.iter().map(|r| r.report.c_fit).collect::<Vec<_>>(),
    });
    Ok((
        vec![("modenergy.csv".into(), series), ("modenergy_summary.csv".into(), summary)],
        derived,
    ))
}

/// `max / min` of positive values; infinite when the minimum is not positive.
pub fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn wkb_sweep(cfg: &WkbSweepConfig, art: &mut Artifacts) -> LabResult<Value> {
    let v = potential(&cfg.potential)?;
    let grid = cfg.grid.build()?;
    let params = cfg.params.iter().map(ParamsSpec::build).collect::<LabResult<Vec<_>>>()?;
    positive("t", cfg.t)?;
    let a_in = amplitude(&grid, cfg.amplitude);
    let setup = WkbSweepSetup {
        grid,
        a_in: &a_in,
        phase: &cfg.phase,
        potential: &v,
        t: cfg.t,
        sobolev_index: cfg.sobolev_index,
    };
    let reference = match cfg.reference {
        ReferenceSpec::Eikonal => WkbReference::Eikonal,
        ReferenceSpec::FreeEvolution => WkbReference::FreeEvolution,
    };
    let res = wkb_error_sweep(&params, &setup, reference).map_err(LabError::solver)?;
    let mut t = Table::new(&["value", "N", "eps", "error", "coupling", "eta"]);
    for i in 0..params.len() {
        t.push(row![res.report.values[i], params[i].n, params[i].eps, res.report.errors[i], res.couplings[i], res.eta[i]]);
    }
    art.write_csv("wkb_sweep.csv", &t)?;
    art.write_plot(&Plot::new("wkb_sweep", "sweep value", "error").log(true, true).curve("wkb_sweep.csv", 1, 4, "error"))?;
    Ok(json!({
        "sweep_variable": res.report.sweep_variable,
        "fitted_slope": res.report.fitted_slope,
        "expected_slope": res.report.expected_slope,
        "c0": res.c0,
    }))
}

pub fn pair_check(cfg: &PairCheckConfig, art: &mut Artifacts) -> LabResult<Value> {
    let v = potential(&cfg.potential)?;
    let grid = cfg.grid.build()?;
    if grid.dim != 3 {
        return Err(LabError::config("pair-check needs a three-dimensional grid"));
    }
    positive("box_radius", cfg.box_radius)?;
    let params = cfg
        .eps
        .iter()
        .map(|&e| {
            ParamsSpec { n: cfg.box_radius / e.powi(6), eps: e, beta: 1.0, kappa: 1.0, alpha: 0.0 }.build()
        })
        .collect::<LabResult<Vec<_>>>()?;
    let phi = pair_field(grid, cfg.eps[0]);
    let sweep = hs_scaling_sweep(&v, &params, &phi).map_err(LabError::solver)?;
    let mut t = Table::new(&[
        "eps", "N", "hs", "hs_bound", "grad", "grad_bound", "sup_slice", "sup_slice_bound",
    ]);
    for (p, d) in params.iter().zip(&sweep.diagnostics) {
        t.push(row![p.eps, p.n, d.hs_norm, d.hs_bound, d.grad_hs_norm, d.grad_bound, d.sup_slice_norm, d.sup_slice_bound]);
    }
    art.write_csv("pair_norms.csv", &t)?;
    art.write_plot(&Plot::new("pair_norms", "eps", "norm").log(true, true)
        .curve("pair_norms.csv", 1, 3, "HS")
        .curve("pair_norms.csv", 1, 4, "HS bound"))?;
    let mut derived = json!({
        "hs_constants": sweep.diagnostics.iter().map(|d| d.hs_constant()).collect::<Vec<_>>(),
        "grad_constants": sweep.diagnostics.iter().map(|d| d.grad_constant()).collect::<Vec<_>>(),
        "sup_slice_constants": sweep.diagnostics.iter().map(|d| d.sup_slice_constant()).collect::<Vec<_>>(),
    });
    if !cfg.kinetic_scales.is_empty() {
        let (rep, rows) = kinetic_correction_sweep(&v, cfg.kinetic_eps, &cfg.kinetic_scales, &pair_field(grid, cfg.kinetic_eps))
            .map_err(LabError::solver)?;
        let mut k = Table::new(&["scale", "residual", "gradient_gap", "b0"]);
        for (s, r) in cfg.kinetic_scales.iter().zip(&rows) {
            k.push(row![*s, r.residual, r.gradient_gap, r.b0]);
        }
        art.write_csv("pair_kinetic.csv", &k)?;
        art.write_plot(&Plot::new("pair_kinetic", "scale", "residual").log(true, true).curve("pair_kinetic.csv", 1, 2, "L1 residual"))?;
        derived["kinetic_slope"] = json!(rep.fitted_slope);
    }
    Ok(derived)
}

/// Smooth normalized condensate on a periodic cube.
pub fn pair_field(grid: Grid, eps: f64) -> WaveField {
    let k = 2.0 * PI / grid.box_len;
    WaveField::from_fn(grid, eps, |x| {
        Complex64::new(1.0 + 0.3 * (k * x[0]).cos() * (k * x[1]).sin(), 0.2 * (k * x[2]).cos())
    })
    .normalized()
}
