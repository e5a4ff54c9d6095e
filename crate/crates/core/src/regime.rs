//! Scaling tuple `(N, ε, β, κ, α)` and its derived parameters.

use serde::{Deserialize, Serialize};

use crate::error::GpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Gross-Pitaevskii.
    GP,
    /// Hard-core limit.
    HC,
    /// Between Gross-Pitaevskii and semiclassical.
    BGP,
    /// Semiclassical Gross-Pitaevskii.
    SGP,
    /// Hartree-dilute, `β > 1`.
    HD,
    /// Any tuple outside the named families.
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub n: f64,
    pub eps: f64,
    pub beta: f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl RegimeParams {
    pub fn new(n: f64, eps: f64, beta: f64, kappa: f64, alpha: f64) -> Result<Self, GpError> {
        let p = Self {
            n,
            eps,
            beta,
            kappa,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |what: &str| Err(GpError::InvalidSetup(what.to_string()));
        if !(self.n >= std::f64::consts::E) || !self.n.is_finite() {
            return bad("particle number must be at least e");
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad("semiclassical parameter must lie in (0, 1]");
        }
        if !(self.beta >= 1.0) || !self.beta.is_finite() {
            return bad("beta must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad("kappa must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1)");
        }
        Ok(())
    }

    /// Coupling growth `(ln N)^α`.
    pub fn lambda(&self) -> f64 {
        self.n.ln().powf(self.alpha)
    }

    /// `N^{1-β} ε^{2(1-κ)}`.
    pub fn mu_tilde(&self) -> f64 {
        self.n.powf(1.0 - self.beta) * self.eps.powf(2.0 * (1.0 - self.kappa))
    }

    /// Semiclassical parameter of the two-body problem, `μ̃ / λ`.
    pub fn mu(&self) -> f64 {
        self.mu_tilde() / self.lambda()
    }

    /// Correlation length in macroscopic units, `ε⁴`.
    pub fn ell(&self) -> f64 {
        self.eps.powi(4)
    }

    /// Rescaling factor `N^β ε^{2κ}` of the interaction range.
    pub fn scale(&self) -> f64 {
        self.n.powf(self.beta) * self.eps.powf(2.0 * self.kappa)
    }

    /// Box radius of the Neumann problem in two-body units, `scale · ℓ`.
    pub fn box_radius(&self) -> f64 {
        self.scale() * self.ell()
    }

    pub fn regime(&self) -> Regime {
        let one = |x: f64| (x - 1.0).abs() < 1e-12;
        let zero = |x: f64| x.abs() < 1e-12;
        if self.beta > 1.0 + 1e-12 {
            return Regime::HD;
        }
        if !one(self.beta) {
            return Regime::Other;
        }
        if one(self.kappa) {
            if zero(self.alpha) {
                Regime::GP
            } else {
                Regime::HC
            }
        } else if zero(self.kappa) {
            Regime::SGP
        } else {
            Regime::BGP
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gross_pitaevskii_point() {
        let p = RegimeParams::new(64.0, 0.5, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.regime(), Regime::GP);
        assert_eq!(p.lambda(), 1.0);
        assert_relative_eq!(p.mu(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(p.scale(), 16.0, max_relative = 1e-14);
        assert_relative_eq!(p.box_radius(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn classifier_covers_families() {
        let r = |b, k, a| RegimeParams::new(100.0, 0.1, b, k, a).unwrap().regime();
        assert_eq!(r(1.0, 1.0, 0.5), Regime::HC);
        assert_eq!(r(1.0, 0.5, 0.0), Regime::BGP);
        assert_eq!(r(1.0, 0.0, 0.0), Regime::SGP);
        assert_eq!(r(1.5, 0.0, 0.0), Regime::HD);
    }

    #[test]
    fn rejects_out_of_range_tuples() {
        assert!(RegimeParams::new(2.0, 0.5, 1.0, 1.0, 0.0).is_err());
        assert!(RegimeParams::new(10.0, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(RegimeParams::new(10.0, 0.5, 0.5, 1.0, 0.0).is_err());
        assert!(RegimeParams::new(10.0, 0.5, 1.0, 1.0, 1.0).is_err());
    }
}
