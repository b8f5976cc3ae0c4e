//! Two-mode simulator for a 2-boson + 2-fermion mixture in a one-dimensional
//! double well.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`units`] converts SI trap parameters into the dimensionless system
//!    (lengths in µm, energies in units of ξ = 1e-31 J, times in ħ/ξ).
//! 2. [`potential`] evaluates an even double-well potential on a symmetric [`Grid`].
//! 3. [`spsolver`] finds the lowest symmetric/antisymmetric doublet with a
//!    finite-difference Hamiltonian and rotates it into left/right modes.
//! 4. [`twomode`] integrates four-mode contact overlaps.
//! 5. [`manybody`] enumerates the symmetrized two-particle bases and assembles
//!    the 12-dimensional composite Hamiltonian.
//! 6. [`dynamics`], [`observables`] and [`sweep`] produce return
//!    probabilities, fidelities and entanglement entropies.
//!
//! [`model::Model`] wires steps 1-5 together for the common case.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod manybody;
pub mod model;
pub mod observables;
pub mod potential;
pub mod quadrature;
pub mod spsolver;
pub mod sweep;
pub mod twomode;
pub mod units;

pub use error::{Error, Result};
pub use potential::Grid;
