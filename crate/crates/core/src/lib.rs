//! Presymplectic models of a relativistic particle with spin and charge.
//!
//! A state is a point `(X, I, J)` of the evolution space: an event, a unit
//! timelike direction and a unit spacelike spin direction orthogonal to it.
//! A model is a 2-form on that space built from an external field and
//! two couplings `k, ℓ`; the particle moves along the kernel of the form.
//!
//! * [`minkowski`] holds the metric, four-vectors and skew endomorphisms.
//! * [`evolution_space`] holds states, constraints and model coefficients.
//! * [`fields`] covers central, uniform and test fields.
//! * [`presymplectic`] assembles the 2-form and solves for its kernel.
//! * [`dynamics`] integrates kernel, linearized and BMT flows.
//! * [`observables`] computes energy, angular momentum and the spin-orbit fit.
//! * [`sample`] draws seeded random states and families for the experiments.
//!
//! The guide in `book/` walks through each of these with runnable listings.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod evolution_space;
pub mod fields;
pub mod minkowski;
pub mod observables;
pub mod presymplectic;
pub mod sample;
