// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Small dense helpers shared across modules.
//!
//! Operators on the full Hilbert space are column-major `nalgebra` matrices,
//! so `as_slice()` of an operator is its column-stacked vectorization. Under
//! that convention `vec(X Y Z) = (Zᵀ ⊗ X) vec(Y)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a `dim x dim` operator.
pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    assert_eq!(v.len(), dim * dim, "vector length is not dim^2");
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Hilbert-Schmidt inner product `Tr(A† B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `σ₊ = |1⟩⟨0|`, with `|1⟩` the excited state.
pub fn raising() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

/// `σ₋ = |0⟩⟨1|`.
pub fn lowering() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize, seed: u64) -> CMatrix {
        CMatrix::from_fn(d, d, |i, j| {
            let k = (i * 31 + j * 17 + seed as usize * 7) as f64;
            C64::new((k * 0.37).sin(), (k * 0.11).cos())
        })
    }

    #[test]
    fn column_stacking_identity() {
        let (x, y, z) = (sample(3, 1), sample(3, 2), sample(3, 3));
        let lhs = vectorize(&(&x * &y * &z));
        let rhs = kron(&z.transpose(), &x) * vectorize(&y);
        assert!(max_abs(&CMatrix::from_column_slice(9, 1, (lhs - rhs).as_slice())) < 1e-12);
    }

    #[test]
    fn vectorize_round_trip() {
        let a = sample(4, 5);
        assert_eq!(unvectorize(&vectorize(&a), 4), a);
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        assert!(max_abs(&(commutator(&x, &y) - z.map(|v| v * 2.0 * I))) < 1e-15);
        assert!(max_abs(&(&x * &x - identity(2))) < 1e-15);
        assert!(max_abs(&(raising() + lowering() - x)) < 1e-15);
    }
}
