//! Closed-form and semi-analytic breathers.
//!
//! Traveling solutions are written in terms of the co-moving envelope
//! coordinate `zeta = gamma sqrt(1 - omega^2) (x - v t)` and the carrier phase
//! `theta = gamma omega (t - v x)`. The small-amplitude breather is the first
//! harmonic of `u = A(zeta) cos(theta) + B(zeta) cos(3 theta) + ...` with
//! `A = sqrt(8 (1 - omega^2) / (3 beta)) sech(zeta)`; `B` is available as a
//! diagnostic from [`solve_b_correction`] but never added to the field.

use crate::models::PhysicalScales;
use crate::numerics::tridiag;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("internal frequency omega must lie in (0, 1), got {0}")]
    InvalidOmega(f64),
    #[error("envelope velocity must satisfy |v| < 1, got {0}")]
    InvalidVelocity(f64),
    #[error("cubic coefficient beta must be > 0, got {0}")]
    InvalidBeta(f64),
    #[error("zeta grid needs n >= 3 points and min < max (got [{min}, {max}] with {n} points)")]
    InvalidGrid { min: f64, max: f64, n: usize },
    #[error("zeta grid too narrow: sech at the ends is {0:e} > 1e-6")]
    GridTooNarrow(f64),
    #[error("third-harmonic operator is numerically singular on this grid")]
    SingularSystem,
}

/// Internal frequency and envelope velocity of a traveling breather.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreatherParams {
    omega: f64,
    v: f64,
    gamma: f64,
}

impl BreatherParams {
    pub fn new(omega: f64, v: f64) -> Result<Self, AnalyticError> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(AnalyticError::InvalidOmega(omega));
        }
        if !(v.abs() < 1.0) {
            return Err(AnalyticError::InvalidVelocity(v));
        }
        Ok(Self {
            omega,
            v,
            gamma: 1.0 / (1.0 - v * v).sqrt(),
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `sqrt(gamma^2 - 1)` carrying the sign of `v`, i.e. `gamma v`.
    pub fn gamma_v(&self) -> f64 {
        self.gamma * self.v
    }

    /// `sqrt(1 - omega^2)`.
    pub fn detuning(&self) -> f64 {
        (1.0 - self.omega * self.omega).sqrt()
    }

    /// Carrier phase `gamma omega t - omega x sqrt(gamma^2 - 1)`.
    pub fn phase(&self, x: f64, t: f64) -> f64 {
        self.gamma * self.omega * t - self.omega * x * self.gamma_v()
    }

    pub fn zeta(&self, x: f64, t: f64) -> CoMovingCoord {
        CoMovingCoord::at(x, t, self)
    }
}

/// Envelope coordinate `gamma x sqrt(1 - omega^2) - t sqrt(1 - omega^2) sqrt(gamma^2 - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CoMovingCoord(f64);

impl CoMovingCoord {
    pub fn at(x: f64, t: f64, params: &BreatherParams) -> Self {
        let k = params.detuning();
        Self(k * (params.gamma * x - params.gamma_v() * t))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Exact traveling sine-Gordon breather.
pub fn sg_traveling_breather(x: f64, t: f64, params: &BreatherParams) -> f64 {
    let ratio = params.detuning() / params.omega;
    let zeta = params.zeta(x, t).value();
    4.0 * (ratio * params.phase(x, t).cos() / zeta.cosh()).atan()
}

/// Exact standing sine-Gordon breather, `sin(omega t)` phase.
pub fn sg_standing_breather(x: f64, t: f64, omega: f64) -> f64 {
    debug_assert!(omega > 0.0 && omega < 1.0);
    let k = (1.0 - omega * omega).sqrt();
    4.0 * (k / omega * (omega * t).sin() / (x * k).cosh()).atan()
}

/// Envelope bound `4 arctan(sqrt(1 - omega^2) / omega)` of the exact breather.
pub fn sg_breather_peak(omega: f64) -> f64 {
    4.0 * ((1.0 - omega * omega).sqrt() / omega).atan()
}

/// Prefactor `sqrt(8 (1 - omega^2) / (3 beta))` of the first harmonic.
pub fn small_amplitude_prefactor(omega: f64, beta: f64) -> f64 {
    (8.0 * (1.0 - omega * omega) / (3.0 * beta)).sqrt()
}

/// Leading term `4 sqrt(1/omega^2 - 1)` of the exact breather's expansion in
/// its amplitude.
pub fn sg_expansion_prefactor(omega: f64) -> f64 {
    4.0 * (1.0 / (omega * omega) - 1.0).sqrt()
}

/// Graphene-superlattice prefactor `sqrt(32 (1 - omega^2) / (3 b^2 + 2))`.
pub fn gsl_prefactor(omega: f64, b: f64) -> f64 {
    (32.0 * (1.0 - omega * omega) / (3.0 * b * b + 2.0)).sqrt()
}

/// First-harmonic amplitude `A(zeta)`.
pub fn amplitude_a(zeta: f64, omega: f64, beta: f64) -> f64 {
    small_amplitude_prefactor(omega, beta) / zeta.cosh()
}

/// Small-amplitude traveling breather of `u_tt - u_xx + u - beta u^3 = 0`.
pub fn small_amplitude_breather(x: f64, t: f64, params: &BreatherParams, beta: f64) -> f64 {
    let zeta = params.zeta(x, t).value();
    amplitude_a(zeta, params.omega, beta) * params.phase(x, t).cos()
}

/// Superlattice breather in physical coordinates: rescale, then evaluate the
/// small-amplitude breather with `beta = b^2/4 + 1/6`.
pub fn gsl_breather_dimensional(x_phys: f64, t_phys: f64, params: &BreatherParams, scales: &PhysicalScales) -> f64 {
    let (x, t) = scales.to_dimensionless(x_phys, t_phys);
    small_amplitude_breather(x, t, params, scales.model().beta())
}

/// Analytic field shapes that can seed a simulation or act as the comparison
/// reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Breather {
    SgTraveling(BreatherParams),
    SgStanding { omega: f64 },
    SmallAmplitude { params: BreatherParams, beta: f64 },
}

impl Breather {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Self::SgTraveling(p) => sg_traveling_breather(x, t, p),
            Self::SgStanding { omega } => sg_standing_breather(x, t, *omega),
            Self::SmallAmplitude { params, beta } => small_amplitude_breather(x, t, params, *beta),
        }
    }
}

/// Uniform grid in `zeta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Default for ZetaGrid {
    fn default() -> Self {
        Self {
            min: -25.0,
            max: 25.0,
            n: 2001,
        }
    }
}

impl ZetaGrid {
    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n).map(|i| self.min + h * i as f64).collect()
    }
}

/// First- and third-harmonic envelopes sampled on a `zeta` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicProfiles {
    pub omega: f64,
    pub beta: f64,
    pub zeta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl HarmonicProfiles {
    /// Right-hand side `-beta A^3 / 4` of the third-harmonic equation.
    pub fn forcing(&self) -> Vec<f64> {
        self.a.iter().map(|a| -0.25 * self.beta * a * a * a).collect()
    }

    /// Max interior residual of the discrete equation
    /// `(1 - omega^2) B'' + (9 omega^2 - 1) B = -beta A^3 / 4`.
    pub fn residual_max(&self) -> f64 {
        let n = self.zeta.len();
        let h = self.zeta[1] - self.zeta[0];
        let s = 1.0 - self.omega * self.omega;
        let k = 9.0 * self.omega * self.omega - 1.0;
        let f = self.forcing();
        (1..n - 1)
            .map(|i| {
                let lap = (self.b[i + 1] - 2.0 * self.b[i] + self.b[i - 1]) / (h * h);
                (s * lap + k * self.b[i] - f[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs_a(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_b(&self) -> f64 {
        self.b.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Solves the third-harmonic boundary-value problem with `B = 0` at both grid
/// ends, using second-order central differences.
pub fn solve_b_correction(omega: f64, beta: f64, grid: &ZetaGrid) -> Result<HarmonicProfiles, AnalyticError> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(AnalyticError::InvalidOmega(omega));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(AnalyticError::InvalidBeta(beta));
    }
    if grid.n < 3 || !(grid.max > grid.min) {
        return Err(AnalyticError::InvalidGrid {
            min: grid.min,
            max: grid.max,
            n: grid.n,
        });
    }
    let edge = 1.0 / grid.min.abs().min(grid.max.abs()).cosh();
    if grid.min > 0.0 || grid.max < 0.0 || edge > 1e-6 {
        return Err(AnalyticError::GridTooNarrow(edge));
    }

    let zeta = grid.points();
    let a: Vec<f64> = zeta.iter().map(|&z| amplitude_a(z, omega, beta)).collect();
    let h = grid.step();
    let s = 1.0 - omega * omega;
    let off = s / (h * h);
    let centre = -2.0 * off + (9.0 * omega * omega - 1.0);

    let m = grid.n - 2;
    let lower = vec![off; m - 1];
    let upper = vec![off; m - 1];
    let diag = vec![centre; m];
    let rhs: Vec<f64> = a[1..grid.n - 1].iter().map(|v| -0.25 * beta * v * v * v).collect();
    let interior = tridiag::solve(&lower, &diag, &upper, &rhs, 1e-12).ok_or(AnalyticError::SingularSystem)?;

    let mut b = Vec::with_capacity(grid.n);
    b.push(0.0);
    b.extend(interior);
    b.push(0.0);
    Ok(HarmonicProfiles {
        omega,
        beta,
        zeta,
        a,
        b,
    })
}
