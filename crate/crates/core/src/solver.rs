//! Explicit three-level leapfrog integration of `u_tt - u_xx + F(u) = 0`.
//!
//! ```text
//! u[n+1]_i = 2 u[n]_i - u[n-1]_i + dt^2 ((u[n]_{i+1} - 2 u[n]_i + u[n]_{i-1}) / dx^2 - F(u[n]_i))
//! ```
//!
//! The scheme is second order in `dx` and `dt`, time-symmetric, and stable for
//! `dt / dx <= 1`; stepping enforces `dt / dx <= 0.9`.

use crate::models::NonlinearityModel;
use thiserror::Error;

/// Largest Courant number accepted when stepping.
pub const CFL_LIMIT: f64 = 0.9;
/// Field magnitude treated as numerical blowup.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("grid needs nx >= 16 and x_max > x_min (got [{x_min}, {x_max}] with nx = {nx})")]
    InvalidGrid { x_min: f64, x_max: f64, nx: usize },
    #[error("spacing {dx} does not divide [{x_min}, {x_max}] into whole cells")]
    IncommensurateSpacing { x_min: f64, x_max: f64, dx: f64 },
    #[error("time step must be finite and > 0, got {0}")]
    InvalidTimeStep(f64),
    #[error("CFL violation: dt/dx = {ratio:.4} exceeds {limit}")]
    CflViolation { ratio: f64, limit: f64 },
    #[error("initial data not finite at x = {x}, t = {t}")]
    NonFiniteSample { x: f64, t: f64 },
    #[error("numerical blowup at t = {t}: max |u| = {max_abs:e}")]
    NumericalBlowup { t: f64, max_abs: f64 },
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Uniform grid `x_i = x_min + i dx`, `i = 0..nx`.
///
/// With [`Boundary::Periodic`] the period is `nx * dx`, i.e. `x_max` and
/// `x_min` are distinct neighbouring points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    nx: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Result<Self, SolverError> {
        if nx < 16 || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(SolverError::InvalidGrid { x_min, x_max, nx });
        }
        Ok(Self { x_min, x_max, nx })
    }

    /// Grid with spacing `dx`; the span must be a whole number of cells.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self, SolverError> {
        if !(dx > 0.0) || !(x_max > x_min) {
            return Err(SolverError::IncommensurateSpacing { x_min, x_max, dx });
        }
        let cells = (x_max - x_min) / dx;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.max(1.0) {
            return Err(SolverError::IncommensurateSpacing { x_min, x_max, dx });
        }
        Self::new(x_min, x_max, rounded as usize + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.dx() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|i| self.x_min + dx * i as f64).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.dx()).round();
        k.clamp(0.0, (self.nx - 1) as f64) as usize
    }

    /// Linear interpolation of grid samples `u` at `x` (clamped to the grid).
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        let s = ((x - self.x_min) / self.dx()).clamp(0.0, (self.nx - 1) as f64);
        let i = (s.floor() as usize).min(self.nx - 2);
        let w = s - i as f64;
        (1.0 - w) * u[i] + w * u[i + 1]
    }
}

/// Domain `[x_min, x_max]` keeping a pulse launched at `x0` with speed `v`
/// at least `margin` away from both ends until `t_end`.
pub fn pulse_domain(x0: f64, v: f64, t_end: f64, margin: f64) -> (f64, f64) {
    let x_end = x0 + v * t_end;
    (x0.min(x_end) - margin, x0.max(x_end) + margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Endpoints pinned to zero.
    Dirichlet0,
    /// Indices wrap around.
    Periodic,
    /// Endpoints held at their initial values (for kinks, whose right vacuum is 2pi).
    Fixed,
}

/// Two consecutive time levels of the field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub dt: f64,
    t_origin: f64,
    level: u64,
}

impl FieldState {
    /// State whose `u_curr` lives at time `t` and `u_prev` at `t - dt`.
    pub fn new(u_prev: Vec<f64>, u_curr: Vec<f64>, t: f64, dt: f64) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::InvalidTimeStep(dt));
        }
        if u_prev.len() != u_curr.len() {
            return Err(SolverError::LengthMismatch {
                expected: u_curr.len(),
                got: u_prev.len(),
            });
        }
        Ok(Self {
            u_prev,
            u_curr,
            dt,
            t_origin: t - dt,
            level: 1,
        })
    }

    /// Time of `u_curr`.
    pub fn t(&self) -> f64 {
        self.t_origin + self.level as f64 * self.dt
    }

    /// Swaps the two levels, so that further steps run the dynamics backwards.
    pub fn reversed(mut self) -> Self {
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.u_curr.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Samples `sol(x, 0)` and `sol(x, dt)` onto the grid.
pub fn init_from_solution<F>(sol: F, grid: &Grid1D, dt: f64) -> Result<FieldState, SolverError>
where
    F: Fn(f64, f64) -> f64,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::InvalidTimeStep(dt));
    }
    let ratio = dt / grid.dx();
    if ratio > 1.0 {
        return Err(SolverError::CflViolation { ratio, limit: 1.0 });
    }
    let sample = |t: f64| -> Result<Vec<f64>, SolverError> {
        grid.points()
            .into_iter()
            .map(|x| {
                let u = sol(x, t);
                if u.is_finite() {
                    Ok(u)
                } else {
                    Err(SolverError::NonFiniteSample { x, t })
                }
            })
            .collect()
    };
    FieldState::new(sample(0.0)?, sample(dt)?, dt, dt)
}

/// Advances the state by one step in place.
pub fn step(
    state: &mut FieldState,
    grid: &Grid1D,
    model: &NonlinearityModel,
    boundary: Boundary,
) -> Result<(), SolverError> {
    let n = grid.nx();
    if state.u_curr.len() != n || state.u_prev.len() != n {
        return Err(SolverError::LengthMismatch {
            expected: n,
            got: state.u_curr.len(),
        });
    }
    let dx = grid.dx();
    let dt = state.dt;
    let ratio = dt / dx;
    if ratio > CFL_LIMIT {
        return Err(SolverError::CflViolation {
            ratio,
            limit: CFL_LIMIT,
        });
    }
    let r2 = ratio * ratio;
    let dt2 = dt * dt;
    let cur = &state.u_curr;
    // u_prev is overwritten in place with the next level
    let next = &mut state.u_prev;

    let update = |left: f64, centre: f64, right: f64, prev: f64| {
        2.0 * centre - prev + r2 * (left - 2.0 * centre + right) - dt2 * model.force(centre)
    };
    for i in 1..n - 1 {
        next[i] = update(cur[i - 1], cur[i], cur[i + 1], next[i]);
    }
    match boundary {
        Boundary::Dirichlet0 => {
            next[0] = 0.0;
            next[n - 1] = 0.0;
        }
        Boundary::Fixed => {
            next[0] = cur[0];
            next[n - 1] = cur[n - 1];
        }
        Boundary::Periodic => {
            next[0] = update(cur[n - 1], cur[0], cur[1], next[0]);
            next[n - 1] = update(cur[n - 2], cur[n - 1], cur[0], next[n - 1]);
        }
    }

    std::mem::swap(&mut state.u_prev, &mut state.u_curr);
    state.level += 1;

    let max_abs = state.max_abs();
    if !(max_abs <= BLOWUP_THRESHOLD) {
        return Err(SolverError::NumericalBlowup { t: state.t(), max_abs });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy: f64,
}

/// Discrete energy `sum dx [u_t^2/2 + u_x^2/2 + V(u)]`, centred at `t - dt/2`:
/// `u_t = (u_curr - u_prev)/dt`, while `u_x` and `V` use the mean of both levels.
pub fn energy(state: &FieldState, model: &NonlinearityModel, grid: &Grid1D, boundary: Boundary) -> EnergyRecord {
    let dx = grid.dx();
    let dt = state.dt;
    let n = state.u_curr.len();
    let mid = |i: usize| 0.5 * (state.u_curr[i] + state.u_prev[i]);
    let mut e = 0.0;
    for i in 0..n {
        let ut = (state.u_curr[i] - state.u_prev[i]) / dt;
        e += 0.5 * ut * ut + model.potential(mid(i));
    }
    let mut grad = 0.0;
    for i in 0..n - 1 {
        let ux = (mid(i + 1) - mid(i)) / dx;
        grad += ux * ux;
    }
    if boundary == Boundary::Periodic {
        let ux = (mid(0) - mid(n - 1)) / dx;
        grad += ux * ux;
    }
    EnergyRecord {
        t: state.t(),
        energy: dx * (e + 0.5 * grad),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: NonlinearityModel,
    pub grid: Grid1D,
    pub dt: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    /// Steps between stored snapshots.
    pub snapshot_every: usize,
    /// Steps between energy records.
    pub energy_every: usize,
    /// Positions whose field value is recorded every step.
    pub probes: Vec<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::InvalidTimeStep(self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if self.snapshot_every == 0 || self.energy_every == 0 {
            return Err(SolverError::InvalidConfig(
                "snapshot_every and energy_every must be >= 1".into(),
            ));
        }
        let ratio = self.dt / self.grid.dx();
        if ratio > CFL_LIMIT {
            return Err(SolverError::CflViolation {
                ratio,
                limit: CFL_LIMIT,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Field history at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    /// Grid coordinate actually sampled.
    pub x: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub energy: Vec<EnergyRecord>,
    pub probes: Vec<ProbeSeries>,
    pub final_state: FieldState,
}

/// Steps `initial` until `t_end`, recording snapshots, energies and probes.
/// The first snapshot is `u_prev` of the initial state.
pub fn run(config: &SimConfig, initial: FieldState) -> Result<RunOutput, SolverError> {
    config.validate()?;
    config
        .model
        .validate()
        .map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
    if initial.dt != config.dt {
        return Err(SolverError::InvalidConfig(format!(
            "initial state dt {} differs from configured dt {}",
            initial.dt, config.dt
        )));
    }
    let grid = &config.grid;
    let mut state = initial;
    let origin = state.t_origin;
    let end_level = ((config.t_end - origin) / config.dt).round() as u64;

    let mut snapshots = vec![Snapshot {
        t: origin + (state.level - 1) as f64 * state.dt,
        u: state.u_prev.clone(),
    }];
    let mut energies = vec![energy(&state, &config.model, grid, config.boundary)];
    let idx: Vec<usize> = config.probes.iter().map(|&x| grid.nearest_index(x)).collect();
    let mut probes: Vec<ProbeSeries> = idx
        .iter()
        .map(|&i| ProbeSeries {
            x: grid.x(i),
            t: vec![state.t() - state.dt, state.t()],
            u: vec![state.u_prev[i], state.u_curr[i]],
        })
        .collect();

    let every = config.snapshot_every as u64;
    if state.level.is_multiple_of(every) {
        snapshots.push(Snapshot {
            t: state.t(),
            u: state.u_curr.clone(),
        });
    }
    while state.level < end_level {
        step(&mut state, grid, &config.model, config.boundary)?;
        let t = state.t();
        for (p, &i) in probes.iter_mut().zip(&idx) {
            p.t.push(t);
            p.u.push(state.u_curr[i]);
        }
        if state.level.is_multiple_of(every) || state.level == end_level {
            snapshots.push(Snapshot {
                t,
                u: state.u_curr.clone(),
            });
        }
        if state.level.is_multiple_of(config.energy_every as u64) || state.level == end_level {
            energies.push(energy(&state, &config.model, grid, config.boundary));
        }
    }
    Ok(RunOutput {
        snapshots,
        energy: energies,
        probes,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{sg_traveling_breather, small_amplitude_breather, BreatherParams};
    use crate::numerics::ode;

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_construction() {
        let g = Grid1D::with_spacing(-50.0, 300.0, 0.05).unwrap();
        assert_eq!(g.nx(), 7001);
        assert!((g.dx() - 0.05).abs() < 1e-15);
        assert!(Grid1D::new(0.0, 1.0, 15).is_err());
        assert!(Grid1D::new(1.0, 0.0, 100).is_err());
        assert!(Grid1D::with_spacing(0.0, 1.0, 0.3).is_err());
        assert_eq!(g.nearest_index(50.01), 2000);
        assert!((g.interpolate(&g.points(), 12.3456) - 12.3456).abs() < 1e-12);
    }

    #[test]
    fn pulse_domain_covers_trajectory() {
        assert_eq!(pulse_domain(0.0, 0.9, 250.0, 50.0), (-50.0, 275.0));
        assert_eq!(pulse_domain(10.0, -0.5, 20.0, 5.0), (-5.0, 15.0));
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let mut s = init_from_solution(|_, _| 0.0, &g, 0.05).unwrap();
        assert_eq!(s.t(), 0.05);
        for m in [
            NonlinearityModel::SineGordon,
            NonlinearityModel::GrapheneSl { b: 0.9 },
            NonlinearityModel::CubicKg { beta: 0.2 },
        ] {
            for _ in 0..50 {
                step(&mut s, &g, &m, Boundary::Dirichlet0).unwrap();
            }
        }
        assert!(s.u_curr.iter().all(|&u| u == 0.0));
        let e = energy(&s, &NonlinearityModel::SineGordon, &g, Boundary::Dirichlet0);
        assert_eq!(e.energy, 0.0);
    }

    #[test]
    fn init_rejects_bad_input() {
        let g = Grid1D::new(0.0, 10.0, 101).unwrap();
        assert!(matches!(
            init_from_solution(|x, _| 1.0 / (x - 5.0), &g, 0.05),
            Err(SolverError::NonFiniteSample { .. })
        ));
        assert!(matches!(
            init_from_solution(|_, _| 0.0, &g, 0.2),
            Err(SolverError::CflViolation { .. })
        ));
        assert!(matches!(
            init_from_solution(|_, _| 0.0, &g, -0.01),
            Err(SolverError::InvalidTimeStep(_))
        ));
    }

    #[test]
    fn step_enforces_cfl_margin() {
        let g = Grid1D::new(0.0, 10.0, 101).unwrap();
        // 0.095 / 0.1 = 0.95 is accepted at init but rejected when stepping
        let mut s = init_from_solution(|_, _| 0.0, &g, 0.095).unwrap();
        let err = step(&mut s, &g, &NonlinearityModel::SineGordon, Boundary::Dirichlet0).unwrap_err();
        assert!(matches!(err, SolverError::CflViolation { .. }));
    }

    #[test]
    fn blowup_is_reported() {
        let g = Grid1D::new(0.0, 10.0, 101).unwrap();
        let mut s = init_from_solution(|_, _| 3.0, &g, 0.05).unwrap();
        let m = NonlinearityModel::CubicKg { beta: 1.0 };
        let mut err = None;
        for _ in 0..10_000 {
            if let Err(e) = step(&mut s, &g, &m, Boundary::Periodic) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(err, Some(SolverError::NumericalBlowup { .. })));
    }

    #[test]
    fn uniform_field_is_a_pendulum() {
        let u0 = 1.0;
        let dt = 1e-3;
        let opts = ode::OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let pendulum = |_: f64, y: &[f64; 2]| [y[1], -y[0].sin()];
        let start = ode::integrate(pendulum, 0.0, [u0, 0.0], dt, &opts).unwrap().y_final()[0];
        let reference = ode::integrate(pendulum, 0.0, [u0, 0.0], 10.0, &opts).unwrap().y_final()[0];

        let g = Grid1D::new(0.0, 15.0, 16).unwrap();
        let mut s = FieldState::new(vec![u0; 16], vec![start; 16], dt, dt).unwrap();
        for _ in 0..9999 {
            step(&mut s, &g, &NonlinearityModel::SineGordon, Boundary::Periodic).unwrap();
        }
        assert!((s.t() - 10.0).abs() < 1e-9);
        for &u in &s.u_curr {
            assert!((u - reference).abs() < 1e-4, "{u} vs {reference}");
        }
    }

    /// Linear Klein-Gordon standing wave cos(kx) cos(Wt) with W^2 = 1 + k^2.
    fn dispersion_error(nx: usize, dt: f64, t_end: f64) -> f64 {
        let period = 20.0;
        let dx = period / nx as f64;
        let g = Grid1D::new(0.0, period - dx, nx).unwrap();
        let k = 2.0 * std::f64::consts::PI * 2.0 / period;
        let w = (1.0 + k * k).sqrt();
        let exact = |x: f64, t: f64| 1e-3 * (k * x).cos() * (w * t).cos();
        let mut s = init_from_solution(exact, &g, dt).unwrap();
        let m = NonlinearityModel::CubicKg { beta: 0.0 };
        let n = (t_end / dt).round() as usize;
        for _ in 1..n {
            step(&mut s, &g, &m, Boundary::Periodic).unwrap();
        }
        let reference: Vec<f64> = g.points().iter().map(|&x| exact(x, s.t())).collect();
        sup_diff(&s.u_curr, &reference) / 1e-3
    }

    #[test]
    fn plane_wave_follows_klein_gordon_dispersion() {
        let coarse = dispersion_error(200, 0.05, 20.0);
        let fine = dispersion_error(400, 0.025, 20.0);
        assert!(coarse < 2e-2, "{coarse}");
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn time_reversal_returns_initial_state() {
        let q = BreatherParams::new(0.9, 0.5).unwrap();
        // wide enough that the pinned ends agree with the breather tails
        let g = Grid1D::with_spacing(-60.0, 60.0, 0.05).unwrap();
        let dt = 1e-3;
        let s0 = init_from_solution(|x, t| sg_traveling_breather(x, t, &q), &g, dt).unwrap();
        let mut s = s0.clone();
        let m = NonlinearityModel::SineGordon;
        for _ in 0..100 {
            step(&mut s, &g, &m, Boundary::Dirichlet0).unwrap();
        }
        let mut s = s.reversed();
        for _ in 0..100 {
            step(&mut s, &g, &m, Boundary::Dirichlet0).unwrap();
        }
        // after reversal u_curr holds the original u_prev and vice versa
        assert!(sup_diff(&s.u_curr, &s0.u_prev) < 1e-8);
        assert!(sup_diff(&s.u_prev, &s0.u_curr) < 1e-8);
    }

    #[test]
    fn static_kink_energy_is_eight() {
        let g = Grid1D::with_spacing(-30.0, 30.0, 0.05).unwrap();
        let kink: Vec<f64> = g.points().iter().map(|&x| 4.0 * x.exp().atan()).collect();
        let s = FieldState::new(kink.clone(), kink, 0.025, 0.025).unwrap();
        let e = energy(&s, &NonlinearityModel::SineGordon, &g, Boundary::Fixed).energy;
        assert!((e - 8.0).abs() < 0.08, "{e}");
    }

    #[test]
    fn energy_is_translation_invariant_on_periodic_grid() {
        let g = Grid1D::new(0.0, 39.9, 400).unwrap();
        let q = BreatherParams::new(0.8, 0.3).unwrap();
        let prev: Vec<f64> = g
            .points()
            .iter()
            .map(|&x| sg_traveling_breather(x - 20.0, 0.0, &q))
            .collect();
        let curr: Vec<f64> = g
            .points()
            .iter()
            .map(|&x| sg_traveling_breather(x - 20.0, 0.05, &q))
            .collect();
        let m = NonlinearityModel::SineGordon;
        let e0 = energy(
            &FieldState::new(prev.clone(), curr.clone(), 0.05, 0.05).unwrap(),
            &m,
            &g,
            Boundary::Periodic,
        );
        for shift in [1usize, 17, 150] {
            let rot = |v: &[f64]| {
                let mut w = v.to_vec();
                w.rotate_right(shift);
                w
            };
            let s = FieldState::new(rot(&prev), rot(&curr), 0.05, 0.05).unwrap();
            let e = energy(&s, &m, &g, Boundary::Periodic);
            assert!((e.energy - e0.energy).abs() < 1e-12 * e0.energy);
        }
    }

    #[test]
    fn gsl_initial_data_amplitude() {
        let q = BreatherParams::new(0.97, 0.9).unwrap();
        let beta = NonlinearityModel::GrapheneSl { b: 0.9 }.beta();
        let g = Grid1D::with_spacing(-50.0, 300.0, 0.05).unwrap();
        let s = init_from_solution(|x, t| small_amplitude_breather(x, t, &q, beta), &g, 0.025).unwrap();
        assert!((s.max_abs() - 0.653).abs() < 2e-3, "{}", s.max_abs());
    }

    #[test]
    fn run_records_snapshots_energy_and_probes() {
        let q = BreatherParams::new(0.9, 0.5).unwrap();
        let g = Grid1D::with_spacing(-30.0, 40.0, 0.05).unwrap();
        let cfg = SimConfig {
            model: NonlinearityModel::SineGordon,
            grid: g,
            dt: 0.025,
            t_end: 10.0,
            boundary: Boundary::Dirichlet0,
            snapshot_every: 100,
            energy_every: 10,
            probes: vec![2.0],
        };
        let s0 = init_from_solution(|x, t| sg_traveling_breather(x, t, &q), &g, cfg.dt).unwrap();
        let out = run(&cfg, s0).unwrap();
        let times: Vec<f64> = out.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 5);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 2.5 * k as f64).abs() < 1e-12);
        }
        assert_eq!(out.probes[0].t.len(), 401);
        assert!((out.final_state.t() - 10.0).abs() < 1e-12);
        let e0 = out.energy[0].energy;
        for e in &out.energy {
            assert!(((e.energy - e0) / e0).abs() < 1e-4);
        }
        // second-order accurate against the exact solution
        let last = out.snapshots.last().unwrap();
        let exact: Vec<f64> = g
            .points()
            .iter()
            .map(|&x| sg_traveling_breather(x, last.t, &q))
            .collect();
        assert!(sup_diff(&last.u, &exact) < 1e-3);
    }

    #[test]
    fn run_rejects_cfl_before_stepping() {
        let g = Grid1D::with_spacing(0.0, 10.0, 0.1).unwrap();
        let s0 = init_from_solution(|_, _| 0.0, &g, 0.095).unwrap();
        let cfg = SimConfig {
            model: NonlinearityModel::SineGordon,
            grid: g,
            dt: 0.095,
            t_end: 1.0,
            boundary: Boundary::Dirichlet0,
            snapshot_every: 1,
            energy_every: 1,
            probes: vec![],
        };
        assert!(matches!(run(&cfg, s0), Err(SolverError::CflViolation { .. })));
    }
}
