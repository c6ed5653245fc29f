// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponentials.
//!
//! [`matrix_exp`] is the scaling-and-squaring method with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, chosen from the 1-norm of the
//! input (Higham 2005). [`expm_multiply`] evaluates `exp(tM) B` without
//! forming the exponential, by a truncated Taylor series over `s` substeps
//! with `‖tM/s‖₁ ≤ 3`. Sparse inputs are multiplied in CSR form.

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest number of squarings before the input is declared out of range.
const MAX_SQUARINGS: i32 = 1000;

pub fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn all_finite<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> bool {
    m.iter().all(|z| z.clone().modulus().is_finite())
}

fn scaled<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, c: f64) -> DMatrix<T> {
    m.map(|z| z * T::from_real(c))
}

/// `exp(M)` for a square real or complex matrix.
pub fn matrix_exp<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::Overflow("matrix_exp input has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let norm = norm1(m);
    for &(degree, theta) in &THETA {
        if norm <= theta {
            return pade_low(m, degree);
        }
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    if squarings > MAX_SQUARINGS {
        return Err(Error::Overflow(format!(
            "matrix_exp input 1-norm {norm:e} is out of range"
        )));
    }
    let a = scaled(m, 0.5f64.powi(squarings));
    let mut r = pade13(&a)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !all_finite(&r) {
        return Err(Error::Overflow("matrix exponential overflowed".into()));
    }
    Ok(r)
}

fn pade_low<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, degree: usize) -> Result<DMatrix<T>> {
    let b: &[f64] = match degree {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let n = a.nrows();
    let a2 = a * a;
    let mut odd = scaled(&DMatrix::identity(n, n), b[1]);
    let mut even = scaled(&DMatrix::identity(n, n), b[0]);
    let mut power = DMatrix::<T>::identity(n, n);
    for k in 1..=degree / 2 {
        power = &power * &a2;
        odd += scaled(&power, b[2 * k + 1]);
        even += scaled(&power, b[2 * k]);
    }
    let u = a * odd;
    solve_pade(even, u)
}

fn pade13<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let b = &B13;
    let n = a.nrows();
    let id = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a * (&a6 * inner_u + scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]) + scaled(&id, b[1]));
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * inner_v + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&id, b[0]);
    solve_pade(v, u)
}

/// `(V - U)⁻¹ (V + U)`.
fn solve_pade<T: ComplexField<RealField = f64>>(v: DMatrix<T>, u: DMatrix<T>) -> Result<DMatrix<T>> {
    let num = &v + &u;
    let den = v - u;
    den.lu()
        .solve(&num)
        .ok_or_else(|| Error::Overflow("singular Padé denominator".into()))
}

/// `exp(t M) B` by a scaled truncated Taylor series.
pub fn expm_multiply<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, b: &DMatrix<T>, t: f64) -> Result<DMatrix<T>> {
    if m.nrows() != m.ncols() || m.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: b.nrows(),
        });
    }
    if t == 0.0 || b.ncols() == 0 {
        return Ok(b.clone());
    }
    let norm = norm1(m) * t.abs();
    if !norm.is_finite() {
        return Err(Error::Overflow("expm_multiply input has non-finite norm".into()));
    }
    let steps = (norm / 3.0).ceil().max(1.0);
    if steps > 1e7 {
        return Err(Error::Overflow(format!("expm_multiply needs {steps:e} substeps")));
    }
    let h = t / steps;
    let sparse = Csr::from_dense_if_sparse(m);
    let mut x = b.clone();
    for _ in 0..steps as usize {
        let mut term = x.clone();
        let mut acc = x;
        let mut small_in_a_row = 0;
        for k in 1..=60 {
            term = match &sparse {
                Some(csr) => csr.mul(&term),
                None => m * term,
            };
            term.scale_mut(h / k as f64);
            acc += &term;
            let tn = max_modulus(&term);
            let an = max_modulus(&acc);
            if tn <= 1e-17 * an || tn == 0.0 {
                small_in_a_row += 1;
                if small_in_a_row == 2 {
                    break;
                }
            } else {
                small_in_a_row = 0;
            }
        }
        if !all_finite(&acc) {
            return Err(Error::Overflow("expm_multiply overflowed".into()));
        }
        x = acc;
    }
    Ok(x)
}

/// Compressed sparse rows.
struct Csr<T> {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: ComplexField<RealField = f64>> Csr<T> {
    /// `None` unless at most one entry in eight is nonzero.
    fn from_dense_if_sparse(m: &DMatrix<T>) -> Option<Self> {
        let (rows, cols) = m.shape();
        if rows * cols < 4096 {
            return None;
        }
        let zero = T::zero();
        let nnz = m.iter().filter(|z| **z != zero).count();
        if nnz * 8 > rows * cols {
            return None;
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for i in 0..rows {
            for j in 0..cols {
                let z = &m[(i, j)];
                if *z != zero {
                    indices.push(j);
                    values.push(z.clone());
                }
            }
            indptr.push(indices.len());
        }
        Some(Self {
            n_cols: cols,
            indptr,
            indices,
            values,
        })
    }

    fn mul(&self, b: &DMatrix<T>) -> DMatrix<T> {
        debug_assert_eq!(b.nrows(), self.n_cols);
        let rows = self.indptr.len() - 1;
        let mut out = DMatrix::zeros(rows, b.ncols());
        for c in 0..b.ncols() {
            let col = b.column(c);
            let mut dst = out.column_mut(c);
            for i in 0..rows {
                let mut acc = T::zero();
                for k in self.indptr[i]..self.indptr[i + 1] {
                    acc += self.values[k].clone() * col[self.indices[k]].clone();
                }
                dst[i] = acc;
            }
        }
        out
    }
}

fn max_modulus<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.clone().modulus()))
}
