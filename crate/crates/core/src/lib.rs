//! Optimal L^p Hardy-type and Rellich-type weights on radially symmetric
//! model domains, with numerical checks of best constants, criticality and
//! null-criticality.
//!
//! Modules, bottom-up:
//!
//! - [`domain`]: problem parameters, radial domains and closed-form radial
//!   p-harmonic profiles with their end classification.
//! - [`calculus`]: the radial p-Laplacian, the chain rule for it, flux and
//!   coarea identities.
//! - [`weights`]: Hardy weights, ground states and supersolution
//!   constructions.
//! - [`energy`]: radial grids, piecewise-linear test functions and the energy
//!   functionals.
//! - [`optimality`]: Rayleigh quotient minimization, null sequences, band
//!   masses, the one-dimensional probe and the combined report.
//! - [`rellich`]: second-order Rellich-type weights and their checker.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod defaults;
pub mod domain;
pub mod energy;
pub mod error;
pub mod exec;
pub mod optimality;
pub mod quadrature;
pub mod rellich;
pub mod weights;

pub use error::{Error, Result};
pub use exec::Exec;
