//! The superlattice 2pi-kink, defined implicitly by
//!
//! ```text
//! int_pi^u du' / sqrt(sqrt(1 + b^2 (1 - cos u')) - 1) = 2 xi
//! ```
//!
//! Differentiating gives `du/dxi = 2 sqrt(sqrt(1 + b^2 (1 - cos u)) - 1)` with
//! `u(0) = pi`. The profile is integrated in `s = ln tan(u/4)`, where the ODE
//! becomes `ds/dxi = sqrt(2) b / sqrt(sqrt(1 + 2 b^2 sech^2 s) + 1)`: bounded,
//! smooth, and tending to `b` in both tails, so the exponential approach to the
//! vacua 0 and 2pi is resolved to full relative precision.

use crate::models::one_minus_cos;
use crate::numerics::ode::{self, OdeError, OdeOptions};
use crate::numerics::quad::{self, QuadError};
use crate::solver::{FieldState, Grid1D, SolverError};
use std::f64::consts::{PI, SQRT_2, TAU};
use thiserror::Error;

/// Probes used by the quadrature cross-check.
pub const QUADRATURE_PROBES: usize = 32;
/// Probes closer than this to a vacuum are skipped by the cross-check: the
/// integrand there is ~1/gap, so representation error in `u` dominates.
const PROBE_MIN_GAP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinkError {
    #[error("invalid kink parameter: {0}")]
    InvalidParam(String),
    #[error("quadrature cross-check failed: max |I - 2 xi| = {max_error:e} > {limit:e}")]
    ToleranceNotMet { max_error: f64, limit: f64 },
    #[error(
        "grid too small for the kink: boundary values {left:e} and 2pi - {right_gap:e} not within 1e-6 of the vacua"
    )]
    GridTooSmall { left: f64, right_gap: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// `du/dxi` of the kink.
pub fn kink_slope(b: f64, u: f64) -> f64 {
    // sqrt(1 + b^2 w) - 1 = b^2 w / (sqrt(1 + b^2 w) + 1)
    let w = one_minus_cos(u);
    let q = (1.0 + b * b * w).sqrt();
    2.0 * (b * b * w / (q + 1.0)).sqrt()
}

fn log_slope(b: f64, s: f64) -> f64 {
    let sech = 1.0 / s.cosh();
    SQRT_2 * b / ((1.0 + 2.0 * b * b * sech * sech).sqrt() + 1.0).sqrt()
}

fn u_of_s(s: f64) -> f64 {
    4.0 * s.exp().atan()
}

/// Integrand of the implicit kink relation.
fn implicit_integrand(b: f64, u: f64) -> f64 {
    let w = one_minus_cos(u);
    let q = (1.0 + b * b * w).sqrt();
    (q + 1.0).sqrt() / (b * w.sqrt())
}

/// `int_pi^u du' / sqrt(sqrt(1 + b^2 (1 - cos u')) - 1)` by adaptive quadrature.
pub fn implicit_integral(b: f64, u: f64, abs_tol: f64) -> Result<f64, KinkError> {
    if !(u > 0.0 && u < TAU) {
        return Err(KinkError::InvalidParam(format!("u = {u} outside (0, 2pi)")));
    }
    let (v, _) = quad::integrate(|x| implicit_integrand(b, x), PI, u, abs_tol, 0.0)?;
    Ok(v)
}

/// Kink samples on a uniform `xi` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KinkProfile {
    pub b: f64,
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    s: Vec<f64>,
    tol: f64,
}

impl KinkProfile {
    pub fn xi_max(&self) -> f64 {
        *self.xi.last().expect("non-empty profile")
    }

    /// `u(xi)` by cubic Hermite interpolation in `ln tan(u/4)`; outside the
    /// sampled span the tails are continued with their local slope.
    pub fn eval(&self, xi: f64) -> f64 {
        let n = self.xi.len();
        let (lo, hi) = (self.xi[0], self.xi[n - 1]);
        if xi <= lo {
            return u_of_s(self.s[0] + log_slope(self.b, self.s[0]) * (xi - lo));
        }
        if xi >= hi {
            return u_of_s(self.s[n - 1] + log_slope(self.b, self.s[n - 1]) * (xi - hi));
        }
        let h = self.xi[1] - self.xi[0];
        let i = (((xi - lo) / h).floor() as usize).min(n - 2);
        let t = (xi - self.xi[i]) / h;
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let (d0, d1) = (log_slope(self.b, s0), log_slope(self.b, s1));
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        u_of_s(h00 * s0 + h10 * h * d0 + h01 * s1 + h11 * h * d1)
    }

    /// Largest `|int_pi^u(xi) ... - 2 xi|` over up to `probes` samples spread
    /// evenly through the well-conditioned part of the profile.
    pub fn quadrature_error(&self, probes: usize) -> Result<f64, KinkError> {
        let usable: Vec<usize> = (0..self.u.len())
            .filter(|&i| self.u[i] > PROBE_MIN_GAP && TAU - self.u[i] > PROBE_MIN_GAP)
            .collect();
        if usable.is_empty() || probes == 0 {
            return Ok(0.0);
        }
        let count = probes.min(usable.len());
        let mut worst = 0.0f64;
        for k in 0..count {
            let pos = if count == 1 {
                usable.len() / 2
            } else {
                k * (usable.len() - 1) / (count - 1)
            };
            let i = usable[pos];
            let integral = implicit_integral(self.b, self.u[i], 0.01 * self.tol)?;
            worst = worst.max((integral - 2.0 * self.xi[i]).abs());
        }
        Ok(worst)
    }
}

/// Integrates the kink outward from `u(0) = pi` to `xi = +-xi_max`, samples it
/// at `n_points` uniform positions, and cross-checks it against the implicit
/// integral at [`QUADRATURE_PROBES`] points.
pub fn kink_profile(b: f64, xi_max: f64, n_points: usize, tol: f64) -> Result<KinkProfile, KinkError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(KinkError::InvalidParam(format!("b must be > 0, got {b}")));
    }
    if !(xi_max > 0.0 && xi_max.is_finite()) {
        return Err(KinkError::InvalidParam(format!("xi_max must be > 0, got {xi_max}")));
    }
    if !(tol > 0.0) {
        return Err(KinkError::InvalidParam(format!("tol must be > 0, got {tol}")));
    }
    if n_points < 3 {
        return Err(KinkError::InvalidParam(format!(
            "n_points must be >= 3, got {n_points}"
        )));
    }
    // global error builds up over the span, so step well inside the target;
    // every sample is an integration endpoint rather than an interpolant
    let opts = OdeOptions {
        rtol: 0.01 * tol,
        atol: 0.01 * tol,
        ..Default::default()
    };
    let rhs = |_: f64, y: &[f64; 1]| [log_slope(b, y[0])];

    let h = 2.0 * xi_max / (n_points - 1) as f64;
    let mid = (n_points - 1) as f64 / 2.0;
    let xi: Vec<f64> = (0..n_points).map(|i| (i as f64 - mid) * h).collect();
    let mut s = vec![0.0; n_points];
    let centre = xi.iter().position(|&x| x >= 0.0).expect("symmetric grid");
    let mut march = |range: Vec<usize>| -> Result<(), KinkError> {
        let (mut t, mut y) = (0.0, 0.0);
        for i in range {
            if xi[i] != t {
                y = ode::integrate(rhs, t, [y], xi[i], &opts)?.y_final()[0];
                t = xi[i];
            }
            s[i] = y;
        }
        Ok(())
    };
    march((centre..n_points).collect())?;
    march((0..centre).rev().collect())?;
    let u = s.iter().map(|&v| u_of_s(v)).collect();
    let profile = KinkProfile { b, xi, u, s, tol };

    let limit = 10.0 * tol;
    let max_error = profile.quadrature_error(QUADRATURE_PROBES)?;
    if max_error > limit {
        return Err(KinkError::ToleranceNotMet { max_error, limit });
    }
    Ok(profile)
}

/// Lorentz-contracted kink width in rescaled units, `L0 = b sqrt(1 - v^2)`.
pub fn kink_length(b: f64, v: f64) -> f64 {
    b * (1.0 - v * v).sqrt()
}

/// Samples the traveling kink `u((x - x0 - v t) / L0)` at `t = 0` and `t = dt`.
pub fn kink_initial_state(b: f64, v: f64, x0: f64, grid: &Grid1D, dt: f64) -> Result<FieldState, KinkError> {
    if !(v.abs() < 1.0) {
        return Err(KinkError::InvalidParam(format!("|v| must be < 1, got {v}")));
    }
    let l0 = kink_length(b, v);
    let reach = (grid.x_min() - x0).abs().max((grid.x_max() - x0).abs()) + v.abs() * dt;
    let xi_max = (reach / l0).max(1.0);
    let n_points = ((2.0 * xi_max / 0.02).ceil() as usize + 1) | 1;
    let profile = kink_profile(b, xi_max, n_points, 1e-10)?;

    let state = crate::solver::init_from_solution(|x, t| profile.eval((x - x0 - v * t) / l0), grid, dt)?;
    for level in [&state.u_prev, &state.u_curr] {
        let left = level[0];
        let right_gap = TAU - level[level.len() - 1];
        if left.abs() >= 1e-6 || right_gap.abs() >= 1e-6 {
            return Err(KinkError::GridTooSmall { left, right_gap });
        }
    }
    Ok(state)
}
