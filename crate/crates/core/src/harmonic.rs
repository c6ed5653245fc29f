// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Dissipative Gaussian lattices: quadratic Hamiltonian
//! `H = ½ Σ (Q_x A_xy Q_y + P_x B_xy P_y)` and one linear Lindblad operator
//! per site, `L_v = Σ_j M_vj R_j`, with `R = (Q₁..Q_n, P₁..P_n)` and
//! `[R_k, R_l] = i σ_kl`, `σ = [[0, 𝟙], [−𝟙, 0]]`.
//!
//! Heisenberg-evolved coordinates stay linear, `R_k(s) = Σ_l P_kl(t−s) R_l`,
//! so `[R_k(s), R_l] = i (P σ)_kl 𝟙` and commutator norms are `|P σ|`.
//!
//! Two kernels are available. [`KernelConvention::Displayed`] assembles
//! `S = [[0, −B], [A, 0]] + [[D, E], [−D, −E]] + [[F, G], [−F, −G]]` and
//! propagates with `P = exp(S dt)`. [`KernelConvention::Exact`] uses
//! `S = −σ(h − Im C)`, `h = A ⊕ B`, `C_jl = Σ_v M_vj M̄_vl`, solving
//! `d/ds R(s) = S R(s)` backwards from `t`, so `P = exp(−S dt)`. The two
//! agree on the Hamiltonian blocks; only the exact kernel reproduces the
//! damped dynamics of the master equation.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::{expm_multiply, matrix_exp};
use crate::lattice::Lattice;
use crate::linalg::{CMatrix, C64};

/// Largest `n` for which `exp(S dt)` is formed densely.
pub const DENSE_LIMIT: usize = 512;
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelConvention {
    #[default]
    Displayed,
    Exact,
}

#[derive(Debug, Clone)]
pub struct HarmonicModel {
    lattice: Lattice,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    m: CMatrix,
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

impl HarmonicModel {
    pub fn new(lattice: Lattice, a: DMatrix<f64>, b: DMatrix<f64>, m: CMatrix) -> Result<Self> {
        let n = lattice.n_sites();
        for (name, rows, cols, er, ec) in [
            ("A", a.nrows(), a.ncols(), n, n),
            ("B", b.nrows(), b.ncols(), n, n),
            ("M", m.nrows(), m.ncols(), n, 2 * n),
        ] {
            if rows != er || cols != ec {
                return Err(Error::InvalidArgument(format!(
                    "{name} has shape {rows}x{cols}, expected {er}x{ec}"
                )));
            }
        }
        for (name, mat) in [("A", &a), ("B", &b)] {
            let defect = symmetry_defect(mat);
            if defect > SYMMETRY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{name} is not symmetric (defect {defect:e})"
                )));
            }
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) || m.iter().any(|z| !z.norm().is_finite()) {
            return Err(Error::InvalidArgument("non-finite model entries".into()));
        }
        Ok(Self { lattice, a, b, m })
    }

    pub fn closed(lattice: Lattice, a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = lattice.n_sites();
        Self::new(lattice, a, b, CMatrix::zeros(n, 2 * n))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn m(&self) -> &CMatrix {
        &self.m
    }

    pub fn is_closed(&self) -> bool {
        self.m.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub s: DMatrix<f64>,
    pub d: CMatrix,
    pub e: CMatrix,
    pub f: CMatrix,
    pub g: CMatrix,
    pub sigma: DMatrix<f64>,
    /// `[[0, −B], [A, 0]]`.
    pub hamiltonian: DMatrix<f64>,
    pub convention: KernelConvention,
}

/// `σ = [[0, 𝟙], [−𝟙, 0]]` for `n` modes.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |k, l| {
        if l == k + n {
            1.0
        } else if k == l + n {
            -1.0
        } else {
            0.0
        }
    })
}

fn blocks(n: usize, s1: &CMatrix, s2: &CMatrix, s3: &CMatrix, s4: &CMatrix) -> CMatrix {
    let mut s = CMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(s1);
    s.view_mut((0, n), (n, n)).copy_from(s2);
    s.view_mut((n, 0), (n, n)).copy_from(s3);
    s.view_mut((n, n), (n, n)).copy_from(s4);
    s
}

fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn build_kernel(model: &HarmonicModel, convention: KernelConvention) -> KernelMatrix {
    let n = model.n_sites();
    let m = &model.m;
    let half_i = C64::new(0.0, 0.5);
    // Σ_v M̄_{v,y'} M_{v,x} with y' ∈ {y, y + n}.
    let d = CMatrix::from_fn(n, n, |x, y| {
        -half_i * (0..n).map(|v| m[(v, y)].conj() * m[(v, x)]).sum::<C64>()
    });
    let e = CMatrix::from_fn(n, n, |x, y| {
        -half_i * (0..n).map(|v| m[(v, y + n)].conj() * m[(v, x)]).sum::<C64>()
    });
    let f = CMatrix::from_fn(n, n, |x, y| {
        half_i * (0..n).map(|v| m[(v, y)].conj() * m[(v, x)]).sum::<C64>()
    });
    let g = CMatrix::from_fn(n, n, |x, y| {
        half_i * (0..n).map(|v| m[(v, x)].conj() * m[(v, y + n)]).sum::<C64>()
    });
    let sigma = symplectic_form(n);
    let mut hamiltonian = DMatrix::zeros(2 * n, 2 * n);
    hamiltonian.view_mut((0, n), (n, n)).copy_from(&(-&model.b));
    hamiltonian.view_mut((n, 0), (n, n)).copy_from(&model.a);

    let s = match convention {
        KernelConvention::Displayed => {
            let a = model.a.map(|x| C64::new(x, 0.0));
            let b = model.b.map(|x| C64::new(x, 0.0));
            let s1 = &d + &f;
            let s2 = -b + &e + &g;
            let s3 = a - &d - &f;
            let s4 = -(&e + &g);
            // D + F = 0 and E + G = −Im(M̄ M), so the blocks are real.
            real_part(&blocks(n, &s1, &s2, &s3, &s4))
        }
        KernelConvention::Exact => {
            let mut h = DMatrix::zeros(2 * n, 2 * n);
            h.view_mut((0, 0), (n, n)).copy_from(&model.a);
            h.view_mut((n, n), (n, n)).copy_from(&model.b);
            let im_c = DMatrix::from_fn(2 * n, 2 * n, |j, l| {
                (0..n).map(|v| m[(v, j)] * m[(v, l)].conj()).sum::<C64>().im
            });
            -(&sigma * (h - im_c))
        }
    };
    KernelMatrix {
        s,
        d,
        e,
        f,
        g,
        sigma,
        hamiltonian,
        convention,
    }
}

impl KernelMatrix {
    pub fn n_sites(&self) -> usize {
        self.sigma.nrows() / 2
    }

    /// Matrix `G` with `P(dt) = exp(G dt)`.
    pub fn propagator_generator(&self) -> DMatrix<f64> {
        match self.convention {
            KernelConvention::Displayed => self.s.clone(),
            KernelConvention::Exact => -&self.s,
        }
    }

    /// Coordinate propagator `P(dt)`.
    pub fn propagator(&self, dt: f64) -> Result<DMatrix<f64>> {
        matrix_exp(&(self.propagator_generator() * dt))
    }

    /// `P(dt) σ`, densely up to [`DENSE_LIMIT`] modes.
    pub fn propagated_sigma(&self, dt: f64) -> Result<DMatrix<f64>> {
        if self.n_sites() <= DENSE_LIMIT {
            Ok(self.propagator(dt)? * &self.sigma)
        } else {
            expm_multiply(&self.propagator_generator(), &self.sigma, dt)
        }
    }

    /// `max |U + L|` over the upper and lower block rows of `S − hamiltonian`;
    /// zero for the displayed kernel.
    pub fn dissipative_sign_defect(&self) -> f64 {
        let n = self.n_sites();
        let diss = &self.s - &self.hamiltonian;
        (diss.rows(0, n) + diss.rows(n, n)).abs().max()
    }
}

/// `‖[R_k(s), R_l]‖` for `dt = t − s`.
#[derive(Debug, Clone)]
pub struct CommutatorMatrix {
    pub dt: f64,
    pub values: DMatrix<f64>,
}

impl CommutatorMatrix {
    pub fn n_sites(&self) -> usize {
        self.values.nrows() / 2
    }
}

pub fn harmonic_commutator_norms(kernel: &KernelMatrix, dt: f64) -> Result<CommutatorMatrix> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be nonnegative, got {dt}")));
    }
    Ok(CommutatorMatrix {
        dt,
        values: kernel.propagated_sigma(dt)?.abs(),
    })
}

/// `max |P σ Pᵀ − σ|`, zero for symplectic propagation.
pub fn symplecticity_defect(kernel: &KernelMatrix, dt: f64) -> Result<f64> {
    let p = kernel.propagator(dt)?;
    Ok((&p * &kernel.sigma * p.transpose() - &kernel.sigma).abs().max())
}

/// Smallest `c₀` with `|entry| ≤ c₀ / [1 + d(x, y)]^η` across `A`, `B` and
/// both halves of `M`.
pub fn c0_fit(model: &HarmonicModel, eta: f64) -> Result<f64> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eta must be finite and positive, got {eta}"
        )));
    }
    let n = model.n_sites();
    let lat = &model.lattice;
    let mut c0: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            let w = (1.0 + lat.dist(x, y)).powf(eta);
            let entry = model.a[(x, y)]
                .abs()
                .max(model.b[(x, y)].abs())
                .max(model.m[(x, y)].norm())
                .max(model.m[(x, y + n)].norm());
            c0 = c0.max(entry * w);
        }
    }
    Ok(c0)
}

pub fn theorem4_bound(c0: f64, p0: f64, eta: f64, dt: f64, dxy: f64) -> Result<f64> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be nonnegative, got {dt}")));
    }
    if !(dxy > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let rate = 2.0 * p0 * (c0 + p0 * c0 * c0);
    Ok((rate * dt).exp() / (2.0 * p0 * (1.0 + dxy).powf(eta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CanonicalPair {
    QQ,
    PP,
    QP,
    PQ,
}

impl CanonicalPair {
    pub const ALL: [CanonicalPair; 4] = [
        CanonicalPair::QQ,
        CanonicalPair::PP,
        CanonicalPair::QP,
        CanonicalPair::PQ,
    ];

    /// Row and column offsets of the block in the `2n x 2n` matrix.
    pub fn offsets(self, n: usize) -> (usize, usize) {
        match self {
            CanonicalPair::QQ => (0, 0),
            CanonicalPair::PP => (n, n),
            CanonicalPair::QP => (0, n),
            CanonicalPair::PQ => (n, 0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CanonicalPair::QQ => "QQ",
            CanonicalPair::PP => "PP",
            CanonicalPair::QP => "QP",
            CanonicalPair::PQ => "PQ",
        }
    }
}

/// One `(x, y, block)` comparison at fixed `dt`; `x ≠ y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCheck {
    pub x: usize,
    pub y: usize,
    pub pair: CanonicalPair,
    pub d: f64,
    pub dt: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Compare every off-site canonical commutator against the bound.
pub fn certify_theorem4(
    lattice: &Lattice,
    cm: &CommutatorMatrix,
    c0: f64,
    p0: f64,
    eta: f64,
) -> Result<Vec<HarmonicCheck>> {
    let n = cm.n_sites();
    if n != lattice.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: lattice.n_sites(),
            found: n,
        });
    }
    let rows: Vec<Vec<HarmonicCheck>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut out = Vec::with_capacity(4 * n);
            for y in (0..n).filter(|&y| y != x) {
                let d = lattice.dist(x, y);
                let rhs = theorem4_bound(c0, p0, eta, cm.dt, d)?;
                for pair in CanonicalPair::ALL {
                    let (ro, co) = pair.offsets(n);
                    out.push(HarmonicCheck {
                        x,
                        y,
                        pair,
                        d,
                        dt: cm.dt,
                        lhs: cm.values[(ro + x, co + y)],
                        rhs,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}
