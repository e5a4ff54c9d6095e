//! Compactly supported radial interaction profiles.

use serde::{Deserialize, Serialize};

use crate::error::ScatteringError;

/// Shape of the profile inside its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    /// `v(r) = v0` on `[0, R0)`.
    Constant,
    /// `v(r) = v0 (1 - r/R0)^n` on `[0, R0)`.
    Vanishing,
}

/// Serializable description of a radial potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub v0: f64,
    #[serde(rename = "R0", alias = "r0")]
    pub r0: f64,
    #[serde(default)]
    pub n: f64,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<RadialPotential, ScatteringError> {
        match self.kind {
            PotentialKind::Constant => RadialPotential::constant(self.v0, self.r0),
            PotentialKind::Vanishing => RadialPotential::vanishing(self.v0, self.r0, self.n),
        }
    }
}

/// Nonnegative radial potential supported on the ball of radius `r0`.
///
/// `v0 = 0` encodes the free case `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    kind: PotentialKind,
    v0: f64,
    r0: f64,
    n: f64,
}

impl RadialPotential {
    pub fn constant(v0: f64, r0: f64) -> Result<Self, ScatteringError> {
        Self::validated(PotentialKind::Constant, v0, r0, 0.0)
    }

    pub fn vanishing(v0: f64, r0: f64, n: f64) -> Result<Self, ScatteringError> {
        Self::validated(PotentialKind::Vanishing, v0, r0, n)
    }

    /// The free case `v = 0` on a nominal unit support.
    pub fn zero() -> Self {
        Self {
            kind: PotentialKind::Constant,
            v0: 0.0,
            r0: 1.0,
            n: 0.0,
        }
    }

    fn validated(kind: PotentialKind, v0: f64, r0: f64, n: f64) -> Result<Self, ScatteringError> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(ScatteringError::InvalidSpec(format!("support radius {r0}")));
        }
        if !v0.is_finite() {
            return Err(ScatteringError::InvalidSpec(format!("amplitude {v0}")));
        }
        if v0 < 0.0 {
            return Err(ScatteringError::InvalidPotential { r: 0.0, value: v0 });
        }
        if !(n >= 0.0) || !n.is_finite() {
            return Err(ScatteringError::InvalidSpec(format!("vanishing order {n}")));
        }
        Ok(Self { kind, v0, r0, n })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn support_radius(&self) -> f64 {
        self.r0
    }

    pub fn vanishing_order(&self) -> f64 {
        match self.kind {
            PotentialKind::Constant => 0.0,
            PotentialKind::Vanishing => self.n,
        }
    }

    pub fn v_max(&self) -> f64 {
        self.v0
    }

    pub fn is_zero(&self) -> bool {
        self.v0 == 0.0
    }

    /// Interior profile on `[0, R0]`, continuous up to the boundary from the left.
    pub fn profile(&self, r: f64) -> f64 {
        match self.kind {
            PotentialKind::Constant => self.v0,
            PotentialKind::Vanishing => {
                let s = (1.0 - r / self.r0).max(0.0);
                if self.n == 0.0 {
                    self.v0
                } else {
                    self.v0 * s.powf(self.n)
                }
            }
        }
    }

    /// Value of the potential, zero outside the support.
    pub fn value(&self, r: f64) -> f64 {
        if r >= self.r0 || r < 0.0 {
            0.0
        } else {
            self.profile(r)
        }
    }

    /// `∫ v dx` over three-dimensional space, in closed form.
    pub fn integral(&self) -> f64 {
        let n = self.vanishing_order();
        4.0 * std::f64::consts::PI * self.v0 * self.r0.powi(3) * 2.0
            / ((n + 1.0) * (n + 2.0) * (n + 3.0))
    }

    /// `R0^2 v_max`, the dimensionless barrier strength.
    pub fn barrier(&self) -> f64 {
        self.r0 * self.r0 * self.v0
    }
}

/// Limit of the scattering length as the semiclassical parameter vanishes.
pub fn capacity(v: &RadialPotential) -> f64 {
    v.support_radius()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn capacity_is_support_radius() {
        assert_eq!(capacity(&RadialPotential::constant(1.0, 1.0).unwrap()), 1.0);
        assert_eq!(capacity(&RadialPotential::constant(3.0, 2.5).unwrap()), 2.5);
        for n in [0.0, 1.0, 2.0, 3.5] {
            assert_eq!(capacity(&RadialPotential::vanishing(1.0, 1.0, n).unwrap()), 1.0);
        }
    }

    #[test]
    fn profile_vanishes_at_order_n() {
        let v = RadialPotential::vanishing(2.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(v.value(0.9), 2.0 * 0.01, max_relative = 1e-12);
        assert_eq!(v.value(1.0), 0.0);
        assert_eq!(v.value(1.5), 0.0);
        assert!(v.value(0.999) > 0.0);
    }

    #[test]
    fn closed_form_integral_matches_constant_ball() {
        let v = RadialPotential::constant(3.0, 2.0).unwrap();
        let ball = 4.0 / 3.0 * std::f64::consts::PI * 8.0;
        assert_relative_eq!(v.integral(), 3.0 * ball, max_relative = 1e-14);
    }

    #[test]
    fn rejects_negative_amplitude() {
        assert!(matches!(
            RadialPotential::constant(-1.0, 1.0),
            Err(ScatteringError::InvalidPotential { .. })
        ));
        assert!(RadialPotential::constant(1.0, 0.0).is_err());
    }

    #[test]
    fn spec_round_trips_through_serde_names() {
        let spec: PotentialSpec =
            serde_json::from_str(r#"{"kind":"vanishing","v0":1.0,"R0":1.0,"n":2}"#).unwrap();
        let v = spec.build().unwrap();
        assert_eq!(v.vanishing_order(), 2.0);
    }
}
