//! Numerical building blocks shared by the physics modules.

pub mod bessel;
pub mod interp;
pub mod lsq;
pub mod minimize;
pub mod ode;
pub mod quad;
