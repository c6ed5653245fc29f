// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact dynamics and Lieb-Robinson bounds for open quantum lattice systems
//! with power-law interactions.
//!
//! Two model families are covered:
//!
//! * spin lattices evolving under a (possibly time-dependent) GKSL master
//!   equation, simulated densely through vectorized superoperators
//!   ([`lindblad`]), with the generic, rescaled-time and matrix-exponential
//!   bounds of [`bounds`];
//! * dissipative harmonic lattices with quadratic Hamiltonians and linear
//!   Lindblad operators, whose canonical commutators follow from a single
//!   `2n x 2n` matrix exponential ([`harmonic`]).
//!
//! Lattice geometry and the kernel constants every bound depends on live in
//! [`lattice`]; operator embedding and norms in [`operators`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod expm;
pub mod harmonic;
pub mod lattice;
pub mod linalg;
pub mod lindblad;
pub mod operators;

pub use error::{Error, Result};
pub use expm::{expm_multiply, matrix_exp};
pub use lattice::{AssumptionConstants, Geometry, Lattice, MetricKind};
pub use linalg::{CMatrix, C64};
