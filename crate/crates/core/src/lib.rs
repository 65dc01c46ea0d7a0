//! Traveling breathers of nonlinear Klein-Gordon equations.
//!
//! * [`models`]: the nonlinearities `F(u)` (sine-Gordon, graphene superlattice, cubic).
//! * [`analytic`]: exact and small-amplitude breathers, third-harmonic correction.
//! * [`kink`]: the superlattice 2pi-kink profile.
//! * [`solver`]: explicit leapfrog integration of `u_tt - u_xx + F(u) = 0`.
//! * [`analysis`]: envelope extraction and the windowed correlation coefficient.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod analytic;
pub mod kink;
pub mod models;
pub mod numerics;
pub mod solver;

pub use analytic::{Breather, BreatherParams};
pub use models::{NonlinearityModel, PhysicalScales};
pub use solver::{Boundary, FieldState, Grid1D, SimConfig};
