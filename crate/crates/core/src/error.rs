// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("operation needs at least two lattice sites")]
    SingleSite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} is outside a lattice of {n_sites} sites")]
    SupportOutOfRange { site: usize, n_sites: usize },

    #[error("support set is empty")]
    EmptySupport,

    #[error("support lists site {0} more than once")]
    DuplicateSite(usize),

    #[error("Schatten order p = {0} is below 1")]
    InvalidNormOrder(f64),

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),

    #[error("Hamiltonian term deviates from Hermitian by {deviation:e}")]
    NonHermitian { deviation: f64 },

    #[error("Hilbert dimension {dim} exceeds the guard {guard}")]
    DimensionGuard { dim: usize, guard: usize },

    #[error("evolution requires r <= t, got r = {r}, t = {t}")]
    InvalidTimeOrder { r: f64, t: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("supports of the two observables overlap")]
    OverlappingSupports,

    #[error("distance between supports must be positive")]
    ZeroDistance,

    #[error("bound requires distinct sites, got {0} twice")]
    CoincidentSites(usize),

    #[error("term on {0} sites is not a pair interaction")]
    NonPairwise(usize),

    #[error("grid mismatch: {lhs} lhs points vs {rhs} rhs points")]
    GridMismatch { lhs: usize, rhs: usize },

    #[error("threshold epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("superoperator norm estimation supports operator dimension <= {max}, got {dim}")]
    EstimatorDimension { dim: usize, max: usize },
}
