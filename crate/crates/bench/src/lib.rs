// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks in `benches/`.

use liebrob_core::harmonic::HarmonicModel;
use liebrob_core::linalg::{kron, pauli_x, pauli_y, pauli_z, CMatrix, C64};
use liebrob_core::lindblad::{GKSLModel, TimeProfile};
use liebrob_core::operators::{random_matrix, Operator};
use liebrob_core::Lattice;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// All-pairs XY chain with `1/d²` couplings and on-site dephasing.
pub fn xy_chain(n: usize, dephasing: f64) -> GKSLModel {
    let lattice = Lattice::chain(n).expect("chain");
    let mut m = GKSLModel::new(lattice.clone(), 2).expect("model");
    let xy = kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y());
    for a in 0..n {
        for b in a + 1..n {
            let d = lattice.dist(a, b);
            let h = &xy * C64::new(1.0 / (d * d), 0.0);
            m.add_hamiltonian(Operator::local(2, vec![a, b], h).unwrap(), TimeProfile::Constant)
                .unwrap();
        }
        m.add_lindblad(
            Operator::local(2, vec![a], pauli_z()).unwrap(),
            dephasing,
            TimeProfile::Constant,
        )
        .unwrap();
    }
    m
}

/// Random complex matrix with unit 1-norm.
pub fn unit_matrix(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_matrix(n, &mut rng);
    let norm = (0..n)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    m * C64::new(1.0 / norm, 0.0)
}

/// Power-law coupled chain with local damping.
pub fn damped_chain(n: usize) -> HarmonicModel {
    let lattice = Lattice::chain(n).expect("chain");
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0
        } else {
            0.5 / (1.0 + lattice.dist(i, j)).powi(3)
        }
    });
    let b = DMatrix::identity(n, n);
    let m = CMatrix::from_fn(n, 2 * n, |v, j| {
        if j == v {
            C64::new(0.3, 0.0)
        } else if j == v + n {
            C64::new(0.0, 0.3)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    HarmonicModel::new(lattice, a, b, m).expect("harmonic model")
}
