// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! GKSL generators as dense vectorized superoperators, and Schrödinger /
//! backward Heisenberg propagation for small spin lattices.
//!
//! Operators are column-stacked, so with `L` the embedded Lindblad operator
//! and `K = Σ γ L†L`:
//!
//! ```text
//! generator  = −i(𝟙⊗H − Hᵀ⊗𝟙) + Σ γ L̄⊗L − ½(𝟙⊗K + Kᵀ⊗𝟙)
//! adjoint    =  i(𝟙⊗H − Hᵀ⊗𝟙) + Σ γ Lᵀ⊗L† − ½(𝟙⊗K + Kᵀ⊗𝟙)
//! ```
//!
//! Time-dependent models are propagated with piecewise-constant exponentials
//! of the generator at step midpoints. Every step is then itself an exact
//! channel (or adjoint channel), and the discrete Schrödinger and Heisenberg
//! products are exact adjoints of each other.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm_multiply;
use crate::lattice::Lattice;
use crate::linalg::{commutator, hermiticity_defect, identity, kron, trace, CMatrix, C64, ONE};
use crate::operators::{embed_matrix, operator_norm, Operator};

/// Default bound on the total Hilbert dimension (six qubits).
pub const DEFAULT_GUARD_DIM: usize = 64;
/// Hermiticity tolerance for Hamiltonian terms.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Two runs at `steps` and `2·steps` differing by more than this are flagged.
pub const DOUBLING_TOL: f64 = 1e-8;
/// Midpoint step used when a caller does not choose a step count.
pub const DEFAULT_MAX_STEP: f64 = 0.01;
/// Tolerance for validating input density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Scalar modulation `f(t)` multiplying a term's operator (Hamiltonian) or
/// rate (dissipator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TimeProfile {
    /// `f(t) = 1`.
    #[default]
    Constant,
    /// `f(t) = 1 + a sin(ωt + φ)`.
    Sinusoidal { amplitude: f64, omega: f64, phase: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => 1.0 + amplitude * (omega * t + phase).sin(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            TimeProfile::Constant => true,
            TimeProfile::Sinusoidal { amplitude, omega, .. } => amplitude == 0.0 || omega == 0.0,
        }
    }

    /// `sup_{s ∈ ℝ} |f(s)|`.
    pub fn sup_abs(&self) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => {
                if omega == 0.0 {
                    (1.0 + amplitude * phase.sin()).abs()
                } else {
                    1.0 + amplitude.abs()
                }
            }
        }
    }

    /// `sup_{s ∈ [r, t]} |f(s)|`, from the endpoints and interior extrema.
    pub fn sup_abs_on(&self, r: f64, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => {
                let (lo, hi) = {
                    let a = omega * r + phase;
                    let b = omega * t + phase;
                    (a.min(b), a.max(b))
                };
                let f = |theta: f64| (1.0 + amplitude * theta.sin()).abs();
                let mut best = f(lo).max(f(hi));
                // Extrema of sin at π/2 + kπ.
                let mut k = ((lo - PI / 2.0) / PI).ceil();
                while PI / 2.0 + k * PI <= hi {
                    best = best.max(f(PI / 2.0 + k * PI));
                    k += 1.0;
                    if k * PI > hi + 2.0 * PI {
                        break;
                    }
                }
                best
            }
        }
    }

    /// `inf_{s ∈ ℝ} f(s)`.
    pub fn inf(&self) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => {
                if omega == 0.0 {
                    1.0 + amplitude * phase.sin()
                } else {
                    1.0 - amplitude.abs()
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub op: Operator,
    pub profile: TimeProfile,
}

#[derive(Debug, Clone)]
pub struct LindbladTerm {
    pub op: Operator,
    pub rate: f64,
    pub profile: TimeProfile,
}

#[derive(Debug, Clone)]
struct Embedded {
    hamiltonians: Vec<CMatrix>,
    lindblads: Vec<CMatrix>,
}

/// A lattice GKSL model given as a sum of local terms.
#[derive(Debug, Clone)]
pub struct GKSLModel {
    lattice: Lattice,
    dim_per_site: usize,
    hamiltonian: Vec<HamiltonianTerm>,
    lindblad: Vec<LindbladTerm>,
    guard_dim: usize,
    embedded: OnceLock<Embedded>,
}

impl GKSLModel {
    pub fn new(lattice: Lattice, dim_per_site: usize) -> Result<Self> {
        if dim_per_site < 2 {
            return Err(Error::InvalidArgument(format!(
                "local dimension must be at least 2, got {dim_per_site}"
            )));
        }
        Ok(Self {
            lattice,
            dim_per_site,
            hamiltonian: Vec::new(),
            lindblad: Vec::new(),
            guard_dim: DEFAULT_GUARD_DIM,
            embedded: OnceLock::new(),
        })
    }

    pub fn with_guard_dim(mut self, guard_dim: usize) -> Self {
        self.guard_dim = guard_dim;
        self
    }

    fn check_term_support(&self, op: &Operator) -> Result<()> {
        if op.is_embedded() {
            return Err(Error::InvalidArgument(
                "model terms must be given as local operators".into(),
            ));
        }
        if op.dim_per_site() != self.dim_per_site {
            return Err(Error::DimensionMismatch {
                expected: self.dim_per_site,
                found: op.dim_per_site(),
            });
        }
        for &s in op.support() {
            self.lattice.check_site(s)?;
        }
        Ok(())
    }

    pub fn add_hamiltonian(&mut self, op: Operator, profile: TimeProfile) -> Result<&mut Self> {
        self.check_term_support(&op)?;
        let deviation = hermiticity_defect(op.matrix());
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation });
        }
        self.hamiltonian.push(HamiltonianTerm { op, profile });
        self.embedded = OnceLock::new();
        Ok(self)
    }

    pub fn add_lindblad(&mut self, op: Operator, rate: f64, profile: TimeProfile) -> Result<&mut Self> {
        self.check_term_support(&op)?;
        if !(rate >= 0.0) {
            return Err(Error::NegativeRate(rate));
        }
        let lowest = rate * profile.inf();
        if lowest < 0.0 {
            return Err(Error::NegativeRate(lowest));
        }
        self.lindblad.push(LindbladTerm { op, rate, profile });
        self.embedded = OnceLock::new();
        Ok(self)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim_per_site(&self) -> usize {
        self.dim_per_site
    }

    pub fn hamiltonian_terms(&self) -> &[HamiltonianTerm] {
        &self.hamiltonian
    }

    pub fn lindblad_terms(&self) -> &[LindbladTerm] {
        &self.lindblad
    }

    pub fn guard_dim(&self) -> usize {
        self.guard_dim
    }

    /// Total Hilbert dimension `d^N`, or `None` on overflow.
    pub fn hilbert_dim(&self) -> Option<usize> {
        u32::try_from(self.lattice.n_sites())
            .ok()
            .and_then(|n| self.dim_per_site.checked_pow(n))
    }

    pub fn is_time_independent(&self) -> bool {
        self.hamiltonian.iter().all(|h| h.profile.is_constant())
            && self.lindblad.iter().all(|l| l.profile.is_constant())
    }

    pub fn check_guard(&self) -> Result<usize> {
        match self.hilbert_dim() {
            Some(dim) if dim <= self.guard_dim => Ok(dim),
            Some(dim) => Err(Error::DimensionGuard {
                dim,
                guard: self.guard_dim,
            }),
            None => Err(Error::DimensionGuard {
                dim: usize::MAX,
                guard: self.guard_dim,
            }),
        }
    }

    fn embedded(&self) -> Result<&Embedded> {
        self.check_guard()?;
        if let Some(e) = self.embedded.get() {
            return Ok(e);
        }
        let n = self.lattice.n_sites();
        let lift = |op: &Operator| embed_matrix(op.matrix(), self.dim_per_site, op.support(), n);
        let e = Embedded {
            hamiltonians: self.hamiltonian.iter().map(|h| lift(&h.op)).collect::<Result<_>>()?,
            lindblads: self.lindblad.iter().map(|l| lift(&l.op)).collect::<Result<_>>()?,
        };
        Ok(self.embedded.get_or_init(|| e))
    }

    /// Full-space Hamiltonian `H(s)`.
    pub fn hamiltonian_at(&self, s: f64) -> Result<CMatrix> {
        let dim = self.check_guard()?;
        let e = self.embedded()?;
        let mut h = CMatrix::zeros(dim, dim);
        for (term, m) in self.hamiltonian.iter().zip(&e.hamiltonians) {
            h += m * C64::new(term.profile.value(s), 0.0);
        }
        Ok(h)
    }

    /// Full-space Lindblad operators with their rates `γ_v(s)`.
    pub fn lindblads_at(&self, s: f64) -> Result<Vec<(CMatrix, f64)>> {
        let e = self.embedded()?;
        Ok(self
            .lindblad
            .iter()
            .zip(&e.lindblads)
            .map(|(term, m)| (m.clone(), term.rate * term.profile.value(s)))
            .collect())
    }

    /// Certified ∞→∞ norm upper bounds of the adjoint generator terms, summed
    /// per support set (sorted ascending). Time profiles enter through
    /// `sup |f|` over `window`, or over all times when `window` is `None`.
    pub fn term_norm_bounds(&self, window: Option<(f64, f64)>) -> Result<Vec<(Vec<usize>, f64)>> {
        let sup = |p: &TimeProfile| match window {
            Some((r, t)) => p.sup_abs_on(r, t),
            None => p.sup_abs(),
        };
        let mut groups: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut push = |support: &[usize], value: f64| {
            let mut key = support.to_vec();
            key.sort_unstable();
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => *v += value,
                None => groups.push((key, value)),
            }
        };
        for h in &self.hamiltonian {
            push(h.op.support(), 2.0 * operator_norm(h.op.matrix())? * sup(&h.profile));
        }
        for l in &self.lindblad {
            let nl = operator_norm(l.op.matrix())?;
            push(l.op.support(), 2.0 * l.rate * sup(&l.profile) * nl * nl);
        }
        Ok(groups)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperoperatorKind {
    Generator,
    AdjointGenerator,
    Propagator,
    General,
}

/// Dense matrix of a linear map on `dim x dim` operators, acting on
/// column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
    kind: SuperoperatorKind,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        Self::with_kind(dim, matrix, SuperoperatorKind::General)
    }

    pub fn with_kind(dim: usize, matrix: CMatrix, kind: SuperoperatorKind) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix, kind })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
            kind: SuperoperatorKind::Propagator,
        }
    }

    /// `X ↦ Σ_k K_k X K_k†`.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let dim = kraus.first().map(|k| k.nrows()).ok_or(Error::EmptySupport)?;
        let mut m = CMatrix::zeros(dim * dim, dim * dim);
        for k in kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.nrows(),
                });
            }
            m += kron(&k.map(|z| z.conj()), k);
        }
        Self::with_kind(dim, m, SuperoperatorKind::Propagator)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> SuperoperatorKind {
        self.kind
    }

    /// Hilbert-Schmidt adjoint: the conjugate transpose of the matrix.
    pub fn adjoint(&self) -> Self {
        let kind = match self.kind {
            SuperoperatorKind::Generator => SuperoperatorKind::AdjointGenerator,
            SuperoperatorKind::AdjointGenerator => SuperoperatorKind::Generator,
            k => k,
        };
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
            kind,
        }
    }

    pub fn apply(&self, op: &CMatrix) -> CMatrix {
        assert_eq!(op.nrows(), self.dim, "operator dimension mismatch");
        let v = &self.matrix * CMatrix::from_column_slice(self.dim * self.dim, 1, op.as_slice());
        CMatrix::from_column_slice(self.dim, self.dim, v.as_slice())
    }
}

fn assemble(model: &GKSLModel, time: f64, adjoint: bool) -> Result<Superoperator> {
    let dim = model.check_guard()?;
    let id = identity(dim);
    let h = model.hamiltonian_at(time)?;
    let sign = if adjoint {
        C64::new(0.0, 1.0)
    } else {
        C64::new(0.0, -1.0)
    };
    let mut m = (kron(&id, &h) - kron(&h.transpose(), &id)) * sign;

    let mut k = CMatrix::zeros(dim, dim);
    for (l, rate) in model.lindblads_at(time)? {
        if rate == 0.0 {
            continue;
        }
        let ldl = l.adjoint() * &l;
        k += ldl * C64::new(rate, 0.0);
        let jump = if adjoint {
            kron(&l.transpose(), &l.adjoint())
        } else {
            kron(&l.map(|z| z.conj()), &l)
        };
        m += jump * C64::new(rate, 0.0);
    }
    m -= (kron(&id, &k) + kron(&k.transpose(), &id)) * C64::new(0.5, 0.0);

    let kind = if adjoint {
        SuperoperatorKind::AdjointGenerator
    } else {
        SuperoperatorKind::Generator
    };
    Superoperator::with_kind(dim, m, kind)
}

/// Matrix of the Schrödinger-picture generator at `time`.
pub fn build_generator(model: &GKSLModel, time: f64) -> Result<Superoperator> {
    assemble(model, time, false)
}

/// Matrix of the adjoint (Heisenberg-picture) generator at `time`, assembled
/// from its own operator formula.
pub fn build_adjoint_generator(model: &GKSLModel, time: f64) -> Result<Superoperator> {
    assemble(model, time, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// One exponential over the whole interval (time-independent model).
    Exponential,
    /// Product of midpoint exponentials.
    Midpoint,
}

/// Result of propagating an operator between two times.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub operator: CMatrix,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub method: Propagation,
    /// `max |result(steps) − result(2·steps)|`; zero for exact propagation.
    pub doubling_residual: f64,
    pub converged: bool,
}

pub type EvolvedObservable = Evolution;

#[derive(Clone, Copy)]
enum Picture {
    Schrodinger,
    Heisenberg,
}

/// Propagate the columns of `vecs` (each a vectorized operator) between
/// `lo ≤ hi`: forward for Schrödinger, backward from `hi` to `lo` for
/// Heisenberg.
fn propagate(model: &GKSLModel, picture: Picture, vecs: CMatrix, lo: f64, hi: f64, steps: usize) -> Result<CMatrix> {
    if hi == lo {
        return Ok(vecs);
    }
    let build = |s: f64| match picture {
        Picture::Schrodinger => build_generator(model, s),
        Picture::Heisenberg => build_adjoint_generator(model, s),
    };
    if model.is_time_independent() {
        let g = build(lo)?;
        return expm_multiply(g.matrix(), &vecs, hi - lo);
    }
    let h = (hi - lo) / steps as f64;
    let mut v = vecs;
    let mid = |k: usize| lo + (k as f64 + 0.5) * h;
    match picture {
        Picture::Schrodinger => {
            for k in 0..steps {
                v = expm_multiply(build(mid(k))?.matrix(), &v, h)?;
            }
        }
        Picture::Heisenberg => {
            for k in (0..steps).rev() {
                v = expm_multiply(build(mid(k))?.matrix(), &v, h)?;
            }
        }
    }
    Ok(v)
}

fn evolve(model: &GKSLModel, picture: Picture, op: &CMatrix, lo: f64, hi: f64, steps: usize) -> Result<Evolution> {
    if !(lo <= hi) {
        return Err(Error::InvalidTimeOrder { r: lo, t: hi });
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let dim = model.check_guard()?;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.nrows(),
        });
    }
    let (from, to) = match picture {
        Picture::Schrodinger => (lo, hi),
        Picture::Heisenberg => (hi, lo),
    };
    let vec = CMatrix::from_column_slice(dim * dim, 1, op.as_slice());
    let exact = model.is_time_independent() || hi == lo;
    let coarse = propagate(model, picture, vec.clone(), lo, hi, steps)?;
    let (residual, method) = if exact {
        (0.0, Propagation::Exponential)
    } else {
        let fine = propagate(model, picture, vec, lo, hi, 2 * steps)?;
        (crate::linalg::max_abs(&(&coarse - fine)), Propagation::Midpoint)
    };
    Ok(Evolution {
        operator: CMatrix::from_column_slice(dim, dim, coarse.as_slice()),
        from,
        to,
        steps,
        method,
        doubling_residual: residual,
        converged: residual <= DOUBLING_TOL,
    })
}

/// `A(r) = τ(r, t) A`, the backward Heisenberg evolution of the full-space
/// observable `a` from `t` to `r`.
pub fn heisenberg_evolve(model: &GKSLModel, a: &CMatrix, r: f64, t: f64, steps: usize) -> Result<EvolvedObservable> {
    evolve(model, Picture::Heisenberg, a, r, t, steps)
}

/// `ρ(t) = T(t, s) ρ(s)`.
pub fn schrodinger_evolve(model: &GKSLModel, rho: &CMatrix, s: f64, t: f64, steps: usize) -> Result<Evolution> {
    validate_state(rho)?;
    evolve(model, Picture::Schrodinger, rho, s, t, steps)
}

pub fn validate_state(rho: &CMatrix) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::InvalidState("density matrix is not square".into()));
    }
    let herm = hermiticity_defect(rho);
    if herm > STATE_TOL {
        return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace is {tr}")));
    }
    let hermitian_part = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let min_eig = hermitian_part
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -STATE_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
    }
    Ok(())
}

fn steps_for(len: f64, max_step: f64) -> usize {
    ((len / max_step).ceil() as usize).max(1)
}

/// `‖[τ(r, t) O_Y, O_X]‖` on `r_grid` for several `O_X` sharing one `O_Y`.
/// Output rows follow `o_xs`; entries follow `r_grid`.
pub fn commutator_norm_curves(
    model: &GKSLModel,
    o_y: &Operator,
    o_xs: &[Operator],
    t: f64,
    r_grid: &[f64],
) -> Result<Vec<Vec<(f64, f64)>>> {
    commutator_norm_curves_with_step(model, o_y, o_xs, t, r_grid, DEFAULT_MAX_STEP)
}

/// As [`commutator_norm_curves`], with midpoint steps no longer than
/// `max_step` for time-dependent models.
pub fn commutator_norm_curves_with_step(
    model: &GKSLModel,
    o_y: &Operator,
    o_xs: &[Operator],
    t: f64,
    r_grid: &[f64],
    max_step: f64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let pairs: Vec<(&Operator, &Operator)> = o_xs.iter().map(|x| (x, o_y)).collect();
    commutator_norm_field(model, &pairs, t, r_grid, max_step)
}

/// Curves for arbitrary `(O_X, O_Y)` pairs. Distinct `O_Y` are propagated
/// together as columns of one block, so the cost is one backward sweep.
pub fn commutator_norm_field(
    model: &GKSLModel,
    pairs: &[(&Operator, &Operator)],
    t: f64,
    r_grid: &[f64],
    max_step: f64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    if !(max_step > 0.0 && max_step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "max_step must be positive, got {max_step}"
        )));
    }
    for (o_x, o_y) in pairs {
        if o_x.support().iter().any(|s| o_y.support().contains(s)) {
            return Err(Error::OverlappingSupports);
        }
    }
    for &r in r_grid {
        if !(0.0..=t).contains(&r) {
            return Err(Error::InvalidTimeOrder { r, t });
        }
    }
    let dim = model.check_guard()?;
    let lattice = model.lattice();

    // Column index of each pair's O_Y in the propagated block.
    let mut ys: Vec<&Operator> = Vec::new();
    let mut y_of = Vec::with_capacity(pairs.len());
    for (_, o_y) in pairs {
        let k = match ys
            .iter()
            .position(|y| y.support() == o_y.support() && y.matrix() == o_y.matrix())
        {
            Some(k) => k,
            None => {
                ys.push(o_y);
                ys.len() - 1
            }
        };
        y_of.push(k);
    }
    let xs: Vec<CMatrix> = pairs
        .iter()
        .map(|(o, _)| o.embed(lattice).map(Operator::into_matrix))
        .collect::<Result<_>>()?;
    let mut current = CMatrix::zeros(dim * dim, ys.len());
    for (k, y) in ys.iter().enumerate() {
        let full = y.embed(lattice)?.into_matrix();
        current.column_mut(k).copy_from_slice(full.as_slice());
    }

    let mut order: Vec<usize> = (0..r_grid.len()).collect();
    order.sort_by(|&a, &b| r_grid[b].total_cmp(&r_grid[a]));
    let fixed = if model.is_time_independent() {
        Some(build_adjoint_generator(model, t)?)
    } else {
        None
    };
    let mut evolved_at = vec![CMatrix::zeros(0, 0); r_grid.len()];
    let mut now = t;
    for &idx in &order {
        let r = r_grid[idx];
        if r < now {
            current = match &fixed {
                Some(g) => expm_multiply(g.matrix(), &current, now - r)?,
                None => propagate(
                    model,
                    Picture::Heisenberg,
                    current,
                    r,
                    now,
                    steps_for(now - r, max_step),
                )?,
            };
            now = r;
        }
        evolved_at[idx] = current.clone();
    }

    xs.iter()
        .zip(&y_of)
        .map(|(x, &k)| {
            evolved_at
                .par_iter()
                .zip(r_grid.par_iter())
                .map(|(block, &r)| {
                    let a = CMatrix::from_column_slice(dim, dim, block.column(k).as_slice());
                    Ok((r, operator_norm(&commutator(&a, x))?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// `‖[τ(r, t) O_Y, O_X]‖` for each `r` in `r_grid`.
pub fn commutator_norm_curve(
    model: &GKSLModel,
    o_x: &Operator,
    o_y: &Operator,
    t: f64,
    r_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    Ok(commutator_norm_curves(model, o_y, std::slice::from_ref(o_x), t, r_grid)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{lowering, max_abs, pauli_x, pauli_y, pauli_z, vectorize};

    fn qubit(support: usize, m: CMatrix) -> Operator {
        Operator::local(2, vec![support], m).unwrap()
    }

    fn single_qubit() -> GKSLModel {
        GKSLModel::new(Lattice::chain(1).unwrap(), 2).unwrap()
    }

    #[test]
    fn empty_model_generator_is_zero() {
        let m = GKSLModel::new(Lattice::chain(2).unwrap(), 2).unwrap();
        let g = build_generator(&m, 0.0).unwrap();
        assert_eq!(max_abs(g.matrix()), 0.0);
        assert_eq!(g.kind(), SuperoperatorKind::Generator);
    }

    #[test]
    fn hamiltonian_generator_matches_commutator() {
        let mut m = single_qubit();
        m.add_hamiltonian(qubit(0, pauli_z()), TimeProfile::Constant).unwrap();
        let g = build_generator(&m, 0.0).unwrap();
        let x = pauli_x();
        let expected = commutator(&pauli_z(), &x) * C64::new(0.0, -1.0);
        assert!(max_abs(&(g.apply(&x) - &expected)) < 1e-15);
        // −i[σ_z, σ_x] = −i(2iσ_y) = 2σ_y
        assert!(max_abs(&(expected - pauli_y() * C64::new(2.0, 0.0))) < 1e-15);
    }

    #[test]
    fn amplitude_damping_on_excited_state() {
        let mut m = single_qubit();
        m.add_lindblad(qubit(0, lowering()), 1.0, TimeProfile::Constant)
            .unwrap();
        let g = build_generator(&m, 0.0).unwrap();
        let mut excited = CMatrix::zeros(2, 2);
        excited[(1, 1)] = ONE;
        let out = g.apply(&excited);
        let mut expected = CMatrix::zeros(2, 2);
        expected[(0, 0)] = ONE;
        expected[(1, 1)] = -ONE;
        assert!(max_abs(&(out - expected)) < 1e-15);
    }

    #[test]
    fn dephasing_adjoint_eigenvector() {
        let gamma = 0.7;
        let mut m = single_qubit();
        m.add_lindblad(qubit(0, pauli_z()), gamma, TimeProfile::Constant)
            .unwrap();
        let adj = build_adjoint_generator(&m, 0.0).unwrap();
        let out = adj.apply(&pauli_x());
        assert!(max_abs(&(out - pauli_x() * C64::new(-2.0 * gamma, 0.0))) < 1e-14);
        assert_eq!(max_abs(&adj.apply(&identity(2))), 0.0);
    }

    #[test]
    fn adjoint_is_conjugate_transpose() {
        let mut m = GKSLModel::new(Lattice::chain(2).unwrap(), 2).unwrap();
        m.add_hamiltonian(
            Operator::local(
                2,
                vec![0, 1],
                kron(&pauli_x(), &pauli_y()) + kron(&pauli_y(), &pauli_x()),
            )
            .unwrap(),
            TimeProfile::Constant,
        )
        .unwrap();
        m.add_lindblad(qubit(1, lowering()), 0.3, TimeProfile::Constant)
            .unwrap();
        let g = build_generator(&m, 0.0).unwrap();
        let a = build_adjoint_generator(&m, 0.0).unwrap();
        assert!(max_abs(&(g.matrix().adjoint() - a.matrix())) < 1e-12);
        assert_eq!(g.adjoint().kind(), SuperoperatorKind::AdjointGenerator);
    }

    #[test]
    fn rejects_non_hermitian_and_negative_rates() {
        let mut m = single_qubit();
        assert!(matches!(
            m.add_hamiltonian(qubit(0, lowering()), TimeProfile::Constant),
            Err(Error::NonHermitian { .. })
        ));
        assert!(matches!(
            m.add_lindblad(qubit(0, lowering()), -1.0, TimeProfile::Constant),
            Err(Error::NegativeRate(_))
        ));
        let swing = TimeProfile::Sinusoidal {
            amplitude: 1.5,
            omega: 1.0,
            phase: 0.0,
        };
        assert!(matches!(
            m.add_lindblad(qubit(0, lowering()), 1.0, swing),
            Err(Error::NegativeRate(_))
        ));
        assert!(matches!(
            m.add_hamiltonian(qubit(3, pauli_z()), TimeProfile::Constant),
            Err(Error::SupportOutOfRange { .. })
        ));
    }

    #[test]
    fn guard_is_enforced() {
        let m = GKSLModel::new(Lattice::chain(7).unwrap(), 2).unwrap();
        assert!(matches!(
            build_generator(&m, 0.0),
            Err(Error::DimensionGuard { dim: 128, guard: 64 })
        ));
        let m = m.with_guard_dim(128);
        assert_eq!(m.check_guard(), Ok(128));
    }

    #[test]
    fn heisenberg_identity_at_equal_times() {
        let mut m = single_qubit();
        m.add_lindblad(
            qubit(0, pauli_z()),
            0.4,
            TimeProfile::Sinusoidal {
                amplitude: 0.5,
                omega: 2.0,
                phase: 0.1,
            },
        )
        .unwrap();
        let a = pauli_x();
        let e = heisenberg_evolve(&m, &a, 1.0, 1.0, 4).unwrap();
        assert_eq!(e.operator, a);
        assert!(matches!(
            heisenberg_evolve(&m, &a, 2.0, 1.0, 4),
            Err(Error::InvalidTimeOrder { .. })
        ));
        assert!(heisenberg_evolve(&m, &a, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn time_dependent_dephasing_matches_integrated_rate() {
        // Dephasing commutes with itself at all times, so the midpoint product
        // is exact up to the midpoint quadrature of ∫γ(s)ds.
        let (gamma, amp, omega) = (0.5, 0.6, 1.3);
        let mut m = single_qubit();
        let profile = TimeProfile::Sinusoidal {
            amplitude: amp,
            omega,
            phase: 0.0,
        };
        m.add_lindblad(qubit(0, pauli_z()), gamma, profile).unwrap();
        let (r, t) = (0.2, 1.7);
        let e = heisenberg_evolve(&m, &pauli_x(), r, t, 1500).unwrap();
        let integral = gamma * ((t - r) - amp / omega * ((omega * t).cos() - (omega * r).cos()));
        let expected = (-2.0 * integral).exp();
        assert!((e.operator[(0, 1)].re - expected).abs() < 1e-6);
        assert!(e.converged, "residual {}", e.doubling_residual);
        assert_eq!(e.method, Propagation::Midpoint);
    }

    #[test]
    fn state_validation() {
        let bad = pauli_x();
        assert!(matches!(validate_state(&bad), Err(Error::InvalidState(_))));
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = C64::new(1.5, 0.0);
        neg[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(validate_state(&neg).is_err());
        let mut ok = CMatrix::zeros(2, 2);
        ok[(0, 0)] = ONE;
        assert!(validate_state(&ok).is_ok());
    }

    #[test]
    fn profile_sup_on_interval() {
        let p = TimeProfile::Sinusoidal {
            amplitude: 0.5,
            omega: 1.0,
            phase: 0.0,
        };
        assert!((p.sup_abs_on(0.0, 0.1) - (1.0 + 0.5 * 0.1f64.sin())).abs() < 1e-15);
        assert!((p.sup_abs_on(0.0, 3.0) - 1.5).abs() < 1e-15);
        assert_eq!(p.sup_abs(), 1.5);
        let neg = TimeProfile::Sinusoidal {
            amplitude: -3.0,
            omega: 1.0,
            phase: 0.0,
        };
        assert!((neg.sup_abs_on(0.0, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(TimeProfile::Constant.sup_abs_on(0.0, 5.0), 1.0);
    }

    #[test]
    fn curve_vanishes_at_final_time_and_without_interactions() {
        let mut m = GKSLModel::new(Lattice::chain(3).unwrap(), 2).unwrap();
        for s in 0..3 {
            m.add_hamiltonian(qubit(s, pauli_z()), TimeProfile::Constant).unwrap();
            m.add_lindblad(qubit(s, pauli_z()), 0.2, TimeProfile::Constant).unwrap();
        }
        let grid: Vec<f64> = (0..=4).map(|k| k as f64 * 0.5).collect();
        let curve = commutator_norm_curve(&m, &qubit(0, pauli_x()), &qubit(2, pauli_x()), 2.0, &grid).unwrap();
        assert!(curve.iter().all(|&(_, v)| v < 1e-13), "{curve:?}");
        assert_eq!(curve[4], (2.0, 0.0));
        assert!(matches!(
            commutator_norm_curve(&m, &qubit(0, pauli_x()), &qubit(0, pauli_z()), 2.0, &grid),
            Err(Error::OverlappingSupports)
        ));
    }

    #[test]
    fn generator_vectorization_matches_operator_formula() {
        let mut m = GKSLModel::new(Lattice::chain(2).unwrap(), 2).unwrap();
        m.add_hamiltonian(
            Operator::local(2, vec![0, 1], kron(&pauli_x(), &pauli_x())).unwrap(),
            TimeProfile::Constant,
        )
        .unwrap();
        m.add_lindblad(qubit(0, lowering()), 0.8, TimeProfile::Constant)
            .unwrap();
        let g = build_generator(&m, 0.0).unwrap();
        let h = m.hamiltonian_at(0.0).unwrap();
        let (l, rate) = m.lindblads_at(0.0).unwrap().remove(0);
        let rho = CMatrix::from_fn(4, 4, |i, j| {
            C64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        });
        let ldl = l.adjoint() * &l;
        let direct = commutator(&h, &rho) * C64::new(0.0, -1.0)
            + (&l * &rho * l.adjoint() - (&ldl * &rho + &rho * &ldl) * C64::new(0.5, 0.0)) * C64::new(rate, 0.0);
        let via = g.matrix() * vectorize(&rho);
        assert!(max_abs(&(CMatrix::from_column_slice(4, 4, via.as_slice()) - direct)) < 1e-14);
    }
}
