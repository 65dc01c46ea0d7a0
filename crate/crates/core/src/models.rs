//! Klein-Gordon nonlinearities `F(u)` in `u_tt - u_xx + F(u) = 0`, their
//! potentials, and the graphene-superlattice unit rescaling.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("miniband ratio b must be finite and >= 0, got {0}")]
    InvalidB(f64),
    #[error("cubic coefficient beta must be finite and >= 0, got {0}")]
    InvalidBeta(f64),
    #[error("physical scales require omega0 > 0, b > 0 and c > 0 (got omega0 = {omega0}, b = {b}, c = {c})")]
    InvalidScales { omega0: f64, b: f64, c: f64 },
}

/// The nonlinearity family. `GrapheneSl { b: 0.0 }` is the continuous
/// sine-Gordon limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityModel {
    SineGordon,
    GrapheneSl { b: f64 },
    CubicKg { beta: f64 },
}

impl NonlinearityModel {
    pub fn graphene(b: f64) -> Result<Self, ModelError> {
        let m = Self::GrapheneSl { b };
        m.validate()?;
        Ok(m)
    }

    pub fn cubic(beta: f64) -> Result<Self, ModelError> {
        let m = Self::CubicKg { beta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Self::SineGordon => Ok(()),
            Self::GrapheneSl { b } if !(b.is_finite() && b >= 0.0) => Err(ModelError::InvalidB(b)),
            Self::CubicKg { beta } if !(beta.is_finite() && beta >= 0.0) => Err(ModelError::InvalidBeta(beta)),
            _ => Ok(()),
        }
    }

    /// `F(u)`.
    #[inline]
    pub fn force(&self, u: f64) -> f64 {
        match *self {
            Self::SineGordon => u.sin(),
            Self::GrapheneSl { b } => u.sin() / (1.0 + b * b * (1.0 - u.cos())).sqrt(),
            Self::CubicKg { beta } => u - beta * u * u * u,
        }
    }

    /// Potential `V` with `V(0) = 0` and `V' = F`.
    pub fn potential(&self, u: f64) -> f64 {
        match *self {
            Self::SineGordon => one_minus_cos(u),
            Self::GrapheneSl { b } => {
                // (2/b^2)(sqrt(1 + b^2 w) - 1) rewritten without the cancellation
                let w = one_minus_cos(u);
                2.0 * w / ((1.0 + b * b * w).sqrt() + 1.0)
            }
            Self::CubicKg { beta } => {
                let u2 = u * u;
                0.5 * u2 - 0.25 * beta * u2 * u2
            }
        }
    }

    /// Coefficient of the cubic term in the small-amplitude expansion
    /// `F(u) = u - beta u^3 + O(u^5)`.
    pub fn beta(&self) -> f64 {
        match *self {
            Self::SineGordon => 1.0 / 6.0,
            Self::GrapheneSl { b } => b * b / 4.0 + 1.0 / 6.0,
            Self::CubicKg { beta } => beta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SineGordon => "sine_gordon",
            Self::GrapheneSl { .. } => "graphene_sl",
            Self::CubicKg { .. } => "cubic_kg",
        }
    }
}

/// `1 - cos u` computed as `2 sin^2(u/2)`, accurate near `u = 0`.
#[inline]
pub(crate) fn one_minus_cos(u: f64) -> f64 {
    let s = (0.5 * u).sin();
    2.0 * s * s
}

/// Dimensional parameters of the superlattice equation
/// `u_tt - c^2 u_xx + omega0^2 b^2 sin u / sqrt(1 + b^2 (1 - cos u)) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales {
    pub omega0: f64,
    pub b: f64,
    pub c: f64,
}

impl PhysicalScales {
    pub fn new(omega0: f64, b: f64, c: f64) -> Result<Self, ModelError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(omega0) && ok(b) && ok(c)) {
            return Err(ModelError::InvalidScales { omega0, b, c });
        }
        Ok(Self { omega0, b, c })
    }

    /// Physical `(x, t)` to the rescaled coordinates `(x omega0 b / c, t omega0 b)`.
    pub fn to_dimensionless(&self, x_phys: f64, t_phys: f64) -> (f64, f64) {
        let k = self.omega0 * self.b;
        (x_phys * k / self.c, t_phys * k)
    }

    pub fn to_physical(&self, x: f64, t: f64) -> (f64, f64) {
        let k = self.omega0 * self.b;
        (x * self.c / k, t / k)
    }

    /// The rescaled-equation model these scales correspond to.
    pub fn model(&self) -> NonlinearityModel {
        NonlinearityModel::GrapheneSl { b: self.b }
    }
}
