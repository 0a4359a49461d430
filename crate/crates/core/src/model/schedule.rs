use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Shape of `k(t)` inside the matching radius `|t| < r0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorProfile {
    /// `k(t) = sigma / r0^2`, the continuous constant continuation.
    #[default]
    Constant,
}

/// Time-dependent spring coefficient `k(t)` equal to `sigma / t^2` for
/// `|t| >= r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSchedule {
    sigma: f64,
    r0: f64,
    mass: f64,
    interior: InteriorProfile,
}

impl CoefficientSchedule {
    /// Unit mass schedule; `sigma` must lie in `[0, 1/4]` and `r0 >= 1`.
    pub fn new(sigma: f64, r0: f64) -> Result<Self> {
        Self::with_mass(sigma, r0, 1.0)
    }

    /// The critical schedule `sigma = m/4` with unit mass.
    pub fn critical(r0: f64) -> Result<Self> {
        Self::new(0.25, r0)
    }

    pub fn with_mass(sigma: f64, r0: f64, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("must be positive, got {mass}")));
        }
        if !(sigma.is_finite() && (0.0..=mass / 4.0).contains(&sigma)) {
            return Err(invalid(
                "sigma",
                format!("must lie in [0, m/4] = [0, {}], got {sigma}", mass / 4.0),
            ));
        }
        if !(r0.is_finite() && r0 >= 1.0) {
            return Err(invalid("r0", format!("must be >= 1, got {r0}")));
        }
        Ok(Self {
            sigma,
            r0,
            mass,
            interior: InteriorProfile::Constant,
        })
    }

    pub fn with_interior(mut self, interior: InteriorProfile) -> Self {
        self.interior = interior;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn interior(&self) -> InteriorProfile {
        self.interior
    }

    /// True iff `sigma == m/4` exactly.
    pub fn is_critical(&self) -> bool {
        self.sigma == self.mass / 4.0
    }

    /// The smaller indicial root `lambda = (1 - sqrt(1 - 4 sigma/m)) / 2`.
    pub fn lambda(&self) -> f64 {
        let disc = (1.0 - 4.0 * self.sigma / self.mass).max(0.0);
        0.5 * (1.0 - disc.sqrt())
    }

    /// `k(t)`; total and bounded by `sigma / r0^2`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let at = t.abs();
        if at >= self.r0 {
            self.sigma / (at * at)
        } else {
            match self.interior {
                InteriorProfile::Constant => self.sigma / (self.r0 * self.r0),
            }
        }
    }

    /// `k(t) / m`, the coefficient of the classical equation.
    pub fn frequency_squared(&self, t: f64) -> f64 {
        self.evaluate(t) / self.mass
    }
}
