//! Generic numerical building blocks shared by the physics modules.

pub mod ode;
pub mod pchip;
pub mod quad;
pub mod stats;
pub mod tridiag;
