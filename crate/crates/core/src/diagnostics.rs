//! Modulated energy, WKB error sweeps, energy splitting and slope fits.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eikonal::{solve_amplitude, solve_phase, wkb_initial_field, InitialPhase};
use crate::error::{DiagnosticsError, GpError};
use crate::euler::{EulerTrajectory, FluidState};
use crate::gp::{EffectiveKernel, EvolveOptions, GpSolver, Trajectory, WaveField};
use crate::numerics::fit_log_log;
use crate::potential::{capacity, RadialPotential};
use crate::regime::RegimeParams;
use crate::scattering::{default_step, eta, solve_dirichlet, ScatteringSolution};
use crate::spectral::{Grid, Spectral};

/// Pointwise pieces of the modulated energy at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatedEnergyParts {
    pub total: f64,
    /// `½∫|(iε∇ + u)φ|²`.
    pub kinetic: f64,
    /// `½∫(K∗ρ^ε)ρ^ε + (c/2)∫(ρ² - 2ρρ^ε)`.
    pub potential: f64,
    /// `‖ρ^ε - ρ‖_{L²}`.
    pub density_l2_err: f64,
    /// `‖J^ε - ρu‖_{L¹}`.
    pub momentum_l1_err: f64,
    /// `‖|ε∇φ|² - ρ|u|²‖_{L¹}`.
    pub kinetic_l1_err: f64,
    /// `max(0, (c/2)‖ρ^ε - ρ‖² - potential)`.
    pub coercivity_defect: f64,
    /// `‖φ‖₂‖(iε∇+u)φ‖₂ + ‖u‖₂‖ρ^ε-ρ‖₂`.
    pub momentum_bound: f64,
    /// `‖(iε∇+u)φ‖₂‖(iε∇-u)φ‖₂ + ‖ρ^ε-ρ‖₂‖u‖₄²`.
    pub kinetic_bound: f64,
}

/// Modulated energy of `field` relative to the fluid state.
pub fn modulated_energy(
    field: &WaveField,
    fluid: &FluidState,
    kernel: &EffectiveKernel,
    c: f64,
) -> Result<f64, DiagnosticsError> {
    Ok(modulated_energy_parts(field, fluid, kernel, c)?.total)
}

pub fn modulated_energy_parts(
    field: &WaveField,
    fluid: &FluidState,
    kernel: &EffectiveKernel,
    c: f64,
) -> Result<ModulatedEnergyParts, DiagnosticsError> {
    if field.grid != fluid.grid {
        return Err(DiagnosticsError::GridMismatch);
    }
    let grid = field.grid;
    let spectral = Spectral::new(grid);
    let eps = field.eps;
    let n = grid.len();
    let dim = grid.dim;
    let i_eps = Complex64::new(0.0, eps);
    let grad = spectral.gradient(&field.values);
    let rho_e = field.density();
    let rho = &fluid.rho;

    let (mut plus2, mut minus2) = (vec![0.0; n], vec![0.0; n]);
    let mut mom = vec![0.0; n];
    let mut kin_err = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    for i in 0..n {
        let phi = field.values[i];
        let mut dj2 = 0.0;
        let mut grad2 = 0.0;
        for a in 0..dim {
            let d = i_eps * grad[a][i];
            let u = fluid.u[a][i];
            plus2[i] += (d + phi * u).norm_sqr();
            minus2[i] += (d - phi * u).norm_sqr();
            let j = (phi.conj() * grad[a][i] * eps).im;
            dj2 += (j - rho[i] * u).powi(2);
            grad2 += (grad[a][i] * eps).norm_sqr();
            u2[i] += u * u;
        }
        mom[i] = dj2.sqrt();
        kin_err[i] = (grad2 - rho[i] * u2[i]).abs();
    }
    let kinetic = 0.5 * grid.integrate(&plus2);
    let conv = kernel.convolve(&spectral, &rho_e);
    let pot: Vec<f64> = (0..n)
        .map(|i| 0.5 * conv[i] * rho_e[i] + 0.5 * c * (rho[i] * rho[i] - 2.0 * rho[i] * rho_e[i]))
        .collect();
    let potential = grid.integrate(&pot);
    let diff: Vec<f64> = (0..n).map(|i| rho_e[i] - rho[i]).collect();
    let density_l2_err = grid.l2_norm(&diff);
    let u_l2 = grid.integrate(&u2).sqrt();
    let u4: Vec<f64> = u2.iter().map(|x| x * x).collect();
    let u_l4_sq = grid.integrate(&u4).sqrt();
    let phi_l2 = field.mass().sqrt();
    let plus_l2 = grid.integrate(&plus2).sqrt();
    let minus_l2 = grid.integrate(&minus2).sqrt();
    Ok(ModulatedEnergyParts {
        total: kinetic + potential,
        kinetic,
        potential,
        density_l2_err,
        momentum_l1_err: grid.integrate(&mom),
        kinetic_l1_err: grid.integrate(&kin_err),
        coercivity_defect: (0.5 * c * density_l2_err.powi(2) - potential).max(0.0),
        momentum_bound: phi_l2 * plus_l2 + u_l2 * density_l2_err,
        kinetic_bound: plus_l2 * minus_l2 + density_l2_err * u_l4_sq,
    })
}

/// Additive terms `λ/L` and `η(μ)` in the Gronwall floor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GronwallOffsets {
    pub lambda_over_l: f64,
    pub eta: f64,
}

impl GronwallOffsets {
    /// Offsets for a scaled-kernel run: `λ / L` with the box radius, and `η` at `params.mu()`.
    pub fn for_params(params: &RegimeParams, v: &RadialPotential) -> Result<Self, DiagnosticsError> {
        Ok(Self {
            lambda_over_l: params.lambda() / params.box_radius(),
            eta: eta(v, params.mu())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulatedEnergyReport {
    pub t_grid: Vec<f64>,
    pub m_values: Vec<f64>,
    pub m_kin: Vec<f64>,
    pub m_pot: Vec<f64>,
    pub density_l2_err: Vec<f64>,
    pub momentum_l1_err: Vec<f64>,
    pub kinetic_l1_err: Vec<f64>,
    pub coercivity_defect: Vec<f64>,
    pub momentum_bound: Vec<f64>,
    pub kinetic_bound: Vec<f64>,
    pub offsets: GronwallOffsets,
    /// `ℳ(0) + ε² + λ/L + η`.
    pub floor: f64,
    /// Smallest `C` with `ℳ(t) + λ/L ≤ e^{Ct}·floor` at every snapshot.
    pub c_fit: f64,
    /// Smallest `C` with `ℳ(t) ≤ e^{Ct}ℳ(0)`, the growth rate without the additive slack.
    pub c_growth: f64,
    /// Smallest `κ` with `‖ρ^ε - ρ‖² ≤ κ e^{C t}·floor` at every snapshot.
    pub kappa: f64,
}

impl ModulatedEnergyReport {
    pub fn momentum_chain_holds(&self) -> bool {
        self.momentum_l1_err
            .iter()
            .zip(&self.momentum_bound)
            .all(|(e, b)| *e <= b * (1.0 + 1e-10) + 1e-14)
    }

    pub fn kinetic_chain_holds(&self) -> bool {
        self.kinetic_l1_err
            .iter()
            .zip(&self.kinetic_bound)
            .all(|(e, b)| *e <= b * (1.0 + 1e-10) + 1e-14)
    }
}

/// Modulated energy along synchronised GP and Euler trajectories, with the fitted Gronwall constant.
pub fn gronwall_check(
    gp: &Trajectory,
    euler: &EulerTrajectory,
    kernel: &EffectiveKernel,
    c: f64,
    offsets: GronwallOffsets,
) -> Result<ModulatedEnergyReport, DiagnosticsError> {
    if gp.times.len() != euler.times.len()
        || gp
            .times
            .iter()
            .zip(&euler.times)
            .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(DiagnosticsError::DesyncedTrajectories);
    }
    let parts = gp
        .snapshots
        .iter()
        .zip(&euler.states)
        .map(|(f, s)| modulated_energy_parts(f, s, kernel, c))
        .collect::<Result<Vec<_>, _>>()?;
    let eps = gp.snapshots[0].eps;
    let floor = parts[0].total + eps * eps + offsets.lambda_over_l + offsets.eta;
    let mut c_fit: f64 = 0.0;
    for (t, p) in gp.times.iter().zip(&parts).skip(1) {
        let ratio = (p.total + offsets.lambda_over_l) / floor;
        if ratio > 1.0 && *t > 0.0 {
            c_fit = c_fit.max(ratio.ln() / t);
        }
    }
    let m0 = parts[0].total;
    let c_growth = gp
        .times
        .iter()
        .zip(&parts)
        .skip(1)
        .filter(|(t, p)| **t > 0.0 && p.total > m0 && m0 > 0.0)
        .map(|(t, p)| (p.total / m0).ln() / t)
        .fold(0.0, f64::max);
    let kappa = gp
        .times
        .iter()
        .zip(&parts)
        .map(|(t, p)| p.density_l2_err.powi(2) / (floor * (c_fit * t).exp()))
        .fold(0.0, f64::max);
    let col = |f: fn(&ModulatedEnergyParts) -> f64| parts.iter().map(f).collect::<Vec<_>>();
    Ok(ModulatedEnergyReport {
        t_grid: gp.times.clone(),
        m_values: col(|p| p.total),
        m_kin: col(|p| p.kinetic),
        m_pot: col(|p| p.potential),
        density_l2_err: col(|p| p.density_l2_err),
        momentum_l1_err: col(|p| p.momentum_l1_err),
        kinetic_l1_err: col(|p| p.kinetic_l1_err),
        coercivity_defect: col(|p| p.coercivity_defect),
        momentum_bound: col(|p| p.momentum_bound),
        kinetic_bound: col(|p| p.kinetic_bound),
        offsets,
        floor,
        c_fit,
        c_growth,
        kappa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Eps,
    Mu,
    NScale,
}

impl SweepVariable {
    /// Whether small values of the variable are the asymptotic end.
    fn decreasing_is_asymptotic(self) -> bool {
        !matches!(self, SweepVariable::NScale)
    }
}

/// Log-log slope of an error sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub sweep_variable: SweepVariable,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_slope: f64,
    pub expected_slope: f64,
    /// Largest `|ln error - fit|` over the fitted points.
    pub residual: f64,
    /// Points entering the fit.
    pub used: Vec<bool>,
}

impl SlopeReport {
    /// Least squares on log-log data, dropping the least asymptotic point when at least three remain.
    pub fn fit(
        sweep_variable: SweepVariable,
        values: Vec<f64>,
        errors: Vec<f64>,
        expected_slope: f64,
    ) -> Result<Self, DiagnosticsError> {
        if values.len() != errors.len() || values.len() < 2 {
            return Err(DiagnosticsError::FitFailure(format!(
                "need at least two paired points, got {} values and {} errors",
                values.len(),
                errors.len()
            )));
        }
        if errors.iter().any(|e| !(*e > 0.0)) || values.iter().any(|v| !(*v > 0.0)) {
            return Err(DiagnosticsError::FitFailure(
                "log-log fit needs positive data".into(),
            ));
        }
        let mut used = vec![true; values.len()];
        if values.len() >= 4 {
            let pick = |a: &(usize, &f64), b: &(usize, &f64)| a.1.partial_cmp(b.1).unwrap();
            let idx = if sweep_variable.decreasing_is_asymptotic() {
                values.iter().enumerate().max_by(pick)
            } else {
                values.iter().enumerate().min_by(pick)
            }
            .map(|(i, _)| i)
            .unwrap();
            used[idx] = false;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = values
            .iter()
            .zip(&errors)
            .zip(&used)
            .filter(|(_, u)| **u)
            .map(|((x, y), _)| (*x, *y))
            .unzip();
        let fit = fit_log_log(&xs, &ys)
            .ok_or_else(|| DiagnosticsError::FitFailure("degenerate sweep values".into()))?;
        Ok(Self {
            sweep_variable,
            values,
            errors,
            fitted_slope: fit.slope,
            expected_slope,
            residual: fit.max_residual,
            used,
        })
    }
}

/// What the GP amplitude is compared against in a WKB sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WkbReference {
    /// Eikonal amplitude, with rotation `4π c0` when `κ = ½`.
    Eikonal,
    /// Free GP evolution at the same `ε`, isolating the interaction contribution.
    FreeEvolution,
}

/// Shared initial data for a WKB sweep.
#[derive(Debug, Clone)]
pub struct WkbSweepSetup<'a> {
    pub grid: Grid,
    pub a_in: &'a [Complex64],
    pub phase: &'a InitialPhase,
    pub potential: &'a RadialPotential,
    pub t: f64,
    /// Sobolev index of the error norm.
    pub sobolev_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WkbSweepResult {
    pub report: SlopeReport,
    /// Point coupling `4π μ̃ a0^μ` per sweep point.
    pub couplings: Vec<f64>,
    /// `η(μ)` per sweep point.
    pub eta: Vec<f64>,
    /// Rotation coupling of the eikonal reference.
    pub c0: f64,
}

fn run_delta_gp(field: &WaveField, g: f64, t: f64) -> Result<WaveField, GpError> {
    let solver = GpSolver::new(Spectral::new(field.grid), EffectiveKernel::delta(g));
    let budget = solver.dt_budget(field);
    let opts = EvolveOptions {
        dt: 0.5 * budget,
        t_final: t,
        snapshots_per_unit_time: 1.0 / t,
    };
    Ok(solver.evolve(field, &opts)?.final_field().clone())
}

/// Runs the delta-kernel GP equation from WKB data for each parameter point and
/// measures the `H^s` distance between the demodulated amplitude and the reference.
pub fn wkb_error_sweep(
    params_list: &[RegimeParams],
    setup: &WkbSweepSetup<'_>,
    reference: WkbReference,
) -> Result<WkbSweepResult, DiagnosticsError> {
    if params_list.len() < 2 {
        return Err(DiagnosticsError::FitFailure("sweep needs at least two points".into()));
    }
    let kappa = params_list[0].kappa;
    if params_list.iter().any(|p| p.kappa != kappa) || !(kappa == 0.0 || kappa == 0.5) {
        return Err(GpError::InvalidSetup("sweep needs a common κ in {0, ½}".into()).into());
    }
    let same_eps = params_list.iter().all(|p| p.eps == params_list[0].eps);
    let variable = if same_eps { SweepVariable::NScale } else { SweepVariable::Eps };
    let v = setup.potential;
    let grid = setup.grid;
    let spectral = Spectral::new(grid);
    let c0 = if kappa == 0.5 { 4.0 * PI * capacity(v) } else { 0.0 };
    let phase_t = solve_phase(setup.phase, &grid, setup.t)?;
    let eikonal = match reference {
        WkbReference::Eikonal => Some(solve_amplitude(setup.a_in, &grid, setup.phase, c0, setup.t)?),
        WkbReference::FreeEvolution => None,
    };
    let max_speed = (0..grid.len())
        .map(|i| {
            let g = setup.phase.gradient(grid.point(i));
            g[..grid.dim].iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);

    let mut values = Vec::new();
    let mut errors = Vec::new();
    let mut couplings = Vec::new();
    let mut etas = Vec::new();
    for p in params_list {
        p.validate()?;
        let eps = p.eps;
        if max_speed / eps > 0.8 * grid.k_max() {
            return Err(GpError::InvalidSetup(format!(
                "phase oscillation {:.3e} exceeds the grid bandwidth at eps = {eps}",
                max_speed / eps
            ))
            .into());
        }
        let mu = p.mu();
        let sol = solve_dirichlet(v, mu, default_step(v, mu))?;
        let g = 4.0 * PI * p.mu_tilde() * sol.a0;
        let init = wkb_initial_field(setup.a_in, &grid, setup.phase, eps)?;
        let demodulate = |f: &WaveField| -> Vec<Complex64> {
            f.values
                .iter()
                .zip(&phase_t.phi)
                .map(|(z, ph)| z * Complex64::from_polar(1.0, -ph / eps))
                .collect()
        };
        let a_n = demodulate(&run_delta_gp(&init, g, setup.t)?);
        let a_ref = match &eikonal {
            Some(a) => a.clone(),
            None => demodulate(&run_delta_gp(&init, 0.0, setup.t)?),
        };
        let diff: Vec<Complex64> = a_n.iter().zip(&a_ref).map(|(x, y)| x - y).collect();
        errors.push(spectral.sobolev_norm(&diff, setup.sobolev_index));
        values.push(match variable {
            SweepVariable::NScale => p.n,
            _ => eps,
        });
        couplings.push(g);
        etas.push(capacity(v) - sol.a0);
    }
    let expected = match variable {
        SweepVariable::NScale => 1.0 - params_list[0].beta,
        _ if kappa == 0.5 => 1.0 / (v.vanishing_order() + 2.0),
        _ => 1.0,
    };
    Ok(WkbSweepResult {
        report: SlopeReport::fit(variable, values, errors, expected)?,
        couplings,
        eta: etas,
        c0,
    })
}

/// Predicted split of the internal energy density and its comparison with the interaction main term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    /// `𝔟₀/a₀`, absent for a vanishing scattering length.
    pub theta: Option<f64>,
    /// `4πμ̃a₀`.
    pub total_share: f64,
    /// `4πμ̃𝔟₀`.
    pub kinetic_share: f64,
    /// `4πμ̃(a₀ - 𝔟₀)`.
    pub interaction_share: f64,
    pub e_kin_pred: Vec<f64>,
    pub e_int_pred: Vec<f64>,
    /// `(K₂∗ρ)ρ` with the squared-profile kernel.
    pub interaction_main: Vec<f64>,
    /// `‖(K₂∗ρ)ρ - 4πμ̃(a₀ - 𝔟₀)ρ²‖_{L¹}`.
    pub interaction_residual: f64,
}

pub fn energy_density_split(
    field: &WaveField,
    squared_kernel: &EffectiveKernel,
    sol: &ScatteringSolution,
    params: &RegimeParams,
) -> Result<EnergySplit, DiagnosticsError> {
    if (sol.mu - params.mu()).abs() > 1e-9 * params.mu() {
        return Err(DiagnosticsError::GridMismatch);
    }
    let mt = params.mu_tilde();
    let total_share = 4.0 * PI * mt * sol.a0;
    let kinetic_share = 4.0 * PI * mt * sol.b0;
    let interaction_share = total_share - kinetic_share;
    let rho = field.density();
    let rho2: Vec<f64> = rho.iter().map(|r| r * r).collect();
    let conv = squared_kernel.convolve(&Spectral::new(field.grid), &rho);
    let interaction_main: Vec<f64> = conv.iter().zip(&rho).map(|(k, r)| k * r).collect();
    let residual: Vec<f64> = interaction_main
        .iter()
        .zip(&rho2)
        .map(|(m, r2)| m - interaction_share * r2)
        .collect();
    Ok(EnergySplit {
        theta: (sol.a0 > 0.0).then(|| sol.b0 / sol.a0),
        total_share,
        kinetic_share,
        interaction_share,
        e_kin_pred: rho2.iter().map(|r| kinetic_share * r).collect(),
        e_int_pred: rho2.iter().map(|r| interaction_share * r).collect(),
        interaction_main,
        interaction_residual: field.grid.l1_norm(&residual),
    })
}

/// Energy shares per unit `4πμ̃` at one `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub mu: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    /// `a₀ - 𝔟₀`.
    pub interaction: f64,
    /// `𝔟₀`.
    pub kinetic: f64,
    /// `c₀ - 𝔟₀`, distance of the kinetic share from its hard-core limit.
    pub residual: f64,
    /// `c₀ - a₀`.
    pub eta: f64,
    /// `residual / eta`.
    pub constant: f64,
}

pub fn energy_share_sweep(v: &RadialPotential, mu_list: &[f64]) -> Result<Vec<ShareRow>, DiagnosticsError> {
    let c0 = capacity(v);
    mu_list
        .iter()
        .map(|&mu| {
            let sol = solve_dirichlet(v, mu, default_step(v, mu))?;
            let eta = c0 - sol.a0;
            let residual = c0 - sol.b0;
            Ok(ShareRow {
                mu,
                a0: sol.a0,
                b0: sol.b0,
                c0,
                interaction: sol.a0 - sol.b0,
                kinetic: sol.b0,
                residual,
                eta,
                constant: residual / eta,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit_drops_least_asymptotic_point() {
        let eps = vec![0.4, 0.2, 0.1, 0.05];
        let mut err: Vec<f64> = eps.iter().map(|e| e * e).collect();
        err[0] = 1.0;
        let r = SlopeReport::fit(SweepVariable::Eps, eps, err, 2.0).unwrap();
        assert!(!r.used[0]);
        assert!((r.fitted_slope - 2.0).abs() < 1e-12);

        let n = vec![10.0, 100.0, 1000.0, 10000.0];
        let mut err: Vec<f64> = n.iter().map(|x: &f64| x.powf(-0.5)).collect();
        err[0] = 5.0;
        let r = SlopeReport::fit(SweepVariable::NScale, n, err, -0.5).unwrap();
        assert!(!r.used[0]);
        assert!((r.fitted_slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_potential_has_no_shares() {
        let rows = energy_share_sweep(&RadialPotential::zero(), &[1.0]).unwrap();
        assert_eq!(rows[0].interaction, 0.0);
        assert_eq!(rows[0].kinetic, 0.0);
    }
}
