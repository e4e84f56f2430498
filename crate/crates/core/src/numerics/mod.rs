//! Quadrature and ODE machinery shared by the physics modules.

pub mod ode;
pub mod quadrature;

pub use ode::{DormandPrince, StepControl};
pub use quadrature::{integrate, integrate_smoothed, Quadrature, Tolerance};
