//! Neumann Laplace–Beltrami eigenvalues of spherical caps and their small
//! perturbations.
//!
//! * [`cap_eigen`] solves the radial problem for `μ₁(B_θ)` by shooting and
//!   locates the critical aperture Θ where `μ₁ sin²Θ = 1`.
//! * [`hole_models`] holds the Joukowski ellipses, their virtual-mass
//!   matrices and an exterior boundary-integral oracle.
//! * [`perturbation`] assembles the `ε²` eigenvalue shift for caps with four
//!   small holes and certifies positive shifts.
//! * [`helmet`] gives first-order slopes for caps with two thin strips.
//! * [`fem`] is an independent P1 surface finite-element eigensolver used to
//!   cross-check the asymptotics.
//!
//! Angles are radians throughout the library; [`units`] converts to and
//! from multiples of π for I/O.

// `!(x > 0.0)` is used on purpose so that NaN lands on the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cap_eigen;
pub mod cli;
pub mod error;
pub mod fem;
pub mod helmet;
pub mod hole_models;
pub mod ode;
pub mod perturbation;
pub mod plot;
pub mod roots;
pub mod units;

pub use error::{Error, Result};
