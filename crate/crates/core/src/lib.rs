//! Numerical construction and verification of type II blow-up for the
//! four-dimensional energy-critical heat equation u_t = Δu + |u|²u.
//!
//! * [`radial_core`]: grids, quadrature, kernels, discrete operators.
//! * [`profile_builder`]: inverse of H, radiation, correction ladder, error profiles.
//! * [`spectral`]: negative eigenpair, orthogonality directions, coercivity checks.
//! * [`modulation_ode`]: the finite-dimensional modulation system and blow-up rate.
//! * [`renormalized_flow`]: the decomposed PDE in self-similar time.

// `!(x > a)` checks are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod modulation_ode;
pub mod profile_builder;
pub mod radial_core;
pub mod renormalized_flow;
pub mod spectral;

pub use error::{BlowupError, Result};
