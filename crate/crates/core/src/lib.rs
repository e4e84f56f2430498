//! Numerical toolkit for entanglement-derived time, temperature and cosmology.
//!
//! Modules map onto the computations:
//! - [`units`]: CODATA constants and Planck-unit conversion.
//! - [`quantum`]: labeled states, density operators, partial trace, entropies.
//! - [`clock`]: relational-time history states on a finite cyclic clock.
//! - [`thermal`]: zero-energy system⊗bath states and emergent Gibbs weights.
//! - [`tunneling`]: WKB rates, black-hole emission, cosmological tunneling.
//! - [`cosmo`]: Friedmann dynamics with a black-body heat-influx source.
//! - [`witness`]: entropy-based entanglement witnesses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod cosmo;
pub mod error;
pub mod numerics;
pub mod quantum;
pub mod thermal;
pub mod tunneling;
pub mod units;
pub mod witness;

pub use error::{Error, Result};
