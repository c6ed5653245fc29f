// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use liebrob_core::lattice::Lattice;
use liebrob_core::linalg::{commutator, kron, pauli_x, pauli_y, pauli_z, CMatrix, C64};
use liebrob_core::lindblad::{GKSLModel, TimeProfile};
use liebrob_core::operators::{random_hermitian, random_matrix, Operator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn xy_term(strength: f64) -> CMatrix {
    (kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y())) * C64::new(strength, 0.0)
}

/// XY couplings `strength / d²` on all pairs plus optional σ_z dephasing.
pub fn xy_chain(n: usize, dephasing: f64) -> GKSLModel {
    let mut m = GKSLModel::new(Lattice::chain(n).unwrap(), 2).unwrap();
    for a in 0..n {
        for b in a + 1..n {
            let d = (b - a) as f64;
            m.add_hamiltonian(
                Operator::local(2, vec![a, b], xy_term(1.0 / (d * d))).unwrap(),
                TimeProfile::Constant,
            )
            .unwrap();
        }
        if dephasing > 0.0 {
            m.add_lindblad(
                Operator::local(2, vec![a], pauli_z()).unwrap(),
                dephasing,
                TimeProfile::Constant,
            )
            .unwrap();
        }
    }
    m
}

pub fn random_profile(rng: &mut impl Rng) -> TimeProfile {
    TimeProfile::Sinusoidal {
        amplitude: rng.random_range(-0.9..0.9),
        omega: rng.random_range(0.5..3.0),
        phase: rng.random_range(0.0..6.0),
    }
}

/// Random qubit chain with pair and on-site Hamiltonians and on-site
/// dissipators; some terms time dependent when `time_dependent`.
pub fn random_model(n: usize, time_dependent: bool, rng: &mut impl Rng) -> GKSLModel {
    let mut m = GKSLModel::new(Lattice::chain(n).unwrap(), 2).unwrap();
    let profile = |rng: &mut _| {
        if time_dependent {
            random_profile(rng)
        } else {
            TimeProfile::Constant
        }
    };
    for a in 0..n {
        let h = random_hermitian(2, rng) * C64::new(0.5, 0.0);
        let p = profile(rng);
        m.add_hamiltonian(Operator::local(2, vec![a], h).unwrap(), p).unwrap();
        let l = random_matrix(2, rng);
        let rate = rng.random_range(0.05..0.6);
        let p = profile(rng);
        m.add_lindblad(Operator::local(2, vec![a], l).unwrap(), rate, p)
            .unwrap();
        if a + 1 < n {
            let h = random_hermitian(4, rng) * C64::new(0.4, 0.0);
            let p = profile(rng);
            m.add_hamiltonian(Operator::local(2, vec![a, a + 1], h).unwrap(), p)
                .unwrap();
        }
    }
    m
}

pub fn random_state(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_matrix(dim, rng);
    let rho = &g * g.adjoint();
    let tr: C64 = rho.diagonal().iter().sum();
    rho / tr
}

/// `𝓛̃(ρ)` straight from the operator formula at time `s`.
pub fn generator_action(model: &GKSLModel, rho: &CMatrix, s: f64) -> CMatrix {
    let h = model.hamiltonian_at(s).unwrap();
    let mut out = commutator(&h, rho) * C64::new(0.0, -1.0);
    for (l, rate) in model.lindblads_at(s).unwrap() {
        let ldl = l.adjoint() * &l;
        out += (&l * rho * l.adjoint() - (&ldl * rho + rho * &ldl) * C64::new(0.5, 0.0)) * C64::new(rate, 0.0);
    }
    out
}

/// `𝓛(A)` straight from the operator formula at time `s`.
pub fn adjoint_action(model: &GKSLModel, a: &CMatrix, s: f64) -> CMatrix {
    let h = model.hamiltonian_at(s).unwrap();
    let mut out = commutator(&h, a) * C64::new(0.0, 1.0);
    for (l, rate) in model.lindblads_at(s).unwrap() {
        let ldl = l.adjoint() * &l;
        out += (l.adjoint() * a * &l - (&ldl * a + a * &ldl) * C64::new(0.5, 0.0)) * C64::new(rate, 0.0);
    }
    out
}

/// Dense matrix of a linear map on `dim x dim` operators, column by column
/// on the matrix units.
pub fn matrix_of(dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let n = dim * dim;
    let mut out = CMatrix::zeros(n, n);
    for b in 0..dim {
        for a in 0..dim {
            let mut unit = CMatrix::zeros(dim, dim);
            unit[(a, b)] = C64::new(1.0, 0.0);
            let image = f(&unit);
            out.column_mut(a + dim * b).copy_from_slice(image.as_slice());
        }
    }
    out
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
