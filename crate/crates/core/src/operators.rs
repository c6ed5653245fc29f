// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-lattice operators: tensor embedding by support, Schatten and
//! operator norms, and two-sided estimates of induced superoperator norms.
//!
//! Tensor factors are ordered by ascending global site index: site 0 is the
//! leftmost Kronecker factor, i.e. the most significant digit of a basis
//! index.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{max_abs, unvectorize, vectorize, CMatrix, CVector, C64};
use crate::lindblad::Superoperator;

/// Largest operator dimension for which full SVD is used in [`operator_norm`].
pub const SVD_DIM_LIMIT: usize = 256;
pub const POWER_ITERATION_MAX: usize = 10_000;
pub const POWER_ITERATION_TOL: f64 = 1e-10;
/// Largest operator dimension accepted by the superoperator norm estimators.
pub const ESTIMATOR_DIM_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim_per_site: usize,
    support: Vec<usize>,
    matrix: CMatrix,
    /// Number of lattice sites when the matrix acts on the full space.
    embedded_sites: Option<usize>,
}

impl Operator {
    /// Operator on the ordered `support`, with tensor factors in that order.
    pub fn local(dim_per_site: usize, support: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        validate_support(&support)?;
        if dim_per_site < 2 {
            return Err(Error::InvalidArgument(format!(
                "local dimension must be at least 2, got {dim_per_site}"
            )));
        }
        let dim = checked_pow(dim_per_site, support.len())?;
        check_square(&matrix, dim)?;
        Ok(Self {
            dim_per_site,
            support,
            matrix,
            embedded_sites: None,
        })
    }

    /// Operator given directly on the full Hilbert space of `n_sites` sites.
    pub fn full(dim_per_site: usize, n_sites: usize, matrix: CMatrix) -> Result<Self> {
        check_square(&matrix, checked_pow(dim_per_site, n_sites)?)?;
        Ok(Self {
            dim_per_site,
            support: (0..n_sites).collect(),
            matrix,
            embedded_sites: Some(n_sites),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dim_per_site(&self) -> usize {
        self.dim_per_site
    }

    pub fn is_embedded(&self) -> bool {
        self.embedded_sites.is_some()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Lift to the full Hilbert space of `lattice`; the declared support is
    /// kept.
    pub fn embed(&self, lattice: &Lattice) -> Result<Operator> {
        if let Some(n) = self.embedded_sites {
            if n != lattice.n_sites() {
                return Err(Error::DimensionMismatch {
                    expected: lattice.n_sites(),
                    found: n,
                });
            }
            return Ok(self.clone());
        }
        for &s in &self.support {
            lattice.check_site(s)?;
        }
        let matrix = embed_matrix(&self.matrix, self.dim_per_site, &self.support, lattice.n_sites())?;
        Ok(Operator {
            dim_per_site: self.dim_per_site,
            support: self.support.clone(),
            matrix,
            embedded_sites: Some(lattice.n_sites()),
        })
    }
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(|| Error::InvalidArgument(format!("dimension {base}^{exp} overflows")))
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    if m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.ncols(),
        });
    }
    Ok(())
}

fn validate_support(support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    for (i, &s) in support.iter().enumerate() {
        if support[..i].contains(&s) {
            return Err(Error::DuplicateSite(s));
        }
    }
    Ok(())
}

/// `A_X ⊗ 𝟙` on `n_sites` sites, where the factors of `local` follow the
/// order of `support`.
pub fn embed_matrix(local: &CMatrix, dim_per_site: usize, support: &[usize], n_sites: usize) -> Result<CMatrix> {
    validate_support(support)?;
    for &s in support {
        if s >= n_sites {
            return Err(Error::SupportOutOfRange { site: s, n_sites });
        }
    }
    let local_dim = checked_pow(dim_per_site, support.len())?;
    check_square(local, local_dim)?;
    let full_dim = checked_pow(dim_per_site, n_sites)?;

    // place[k] = multiplier of the digit of site support[k] in a full index.
    let place: Vec<usize> = support
        .iter()
        .map(|&s| dim_per_site.pow((n_sites - 1 - s) as u32))
        .collect();
    let digits_of = |full: usize| -> usize {
        place
            .iter()
            .fold(0, |acc, &p| acc * dim_per_site + (full / p) % dim_per_site)
    };
    let clear = |full: usize| -> usize { place.iter().fold(full, |acc, &p| acc - ((full / p) % dim_per_site) * p) };
    let spread = |sub: usize| -> usize {
        let mut rem = sub;
        let mut out = 0;
        for &p in place.iter().rev() {
            out += (rem % dim_per_site) * p;
            rem /= dim_per_site;
        }
        out
    };

    let mut out = CMatrix::zeros(full_dim, full_dim);
    for row in 0..full_dim {
        let sub_row = digits_of(row);
        let base = clear(row);
        for sub_col in 0..local_dim {
            let v = local[(sub_row, sub_col)];
            if v != C64::new(0.0, 0.0) {
                out[(row, base + spread(sub_col))] = v;
            }
        }
    }
    Ok(out)
}

/// Convenience wrapper: embed a local operator on `lattice`.
pub fn embed(local: &Operator, lattice: &Lattice) -> Result<Operator> {
    local.embed(lattice)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Schatten `p`-norm; `p = f64::INFINITY` gives the largest singular value.
pub fn schatten_norm(m: &CMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidNormOrder(p));
    }
    let s = singular_values(m);
    if p.is_infinite() {
        return Ok(s.into_iter().fold(0.0, f64::max));
    }
    if p == 1.0 {
        return Ok(s.iter().sum());
    }
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    // Scale by the top singular value so large p does not overflow.
    Ok(top * s.iter().map(|x| (x / top).powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Largest singular value: full SVD up to [`SVD_DIM_LIMIT`], power iteration
/// on `A†A` above.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    if m.nrows().max(m.ncols()) <= SVD_DIM_LIMIT {
        return Ok(singular_values(m).into_iter().fold(0.0, f64::max));
    }
    power_iteration_norm(m, POWER_ITERATION_TOL, POWER_ITERATION_MAX)
}

pub fn power_iteration_norm(m: &CMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.ncols();
    if n == 0 || max_abs(m) == 0.0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0fc0_ffee);
    let mut v = CVector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    v /= C64::new(v.norm(), 0.0);
    let adj = m.adjoint();
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let rayleigh = w.norm_squared();
        let next = &adj * w;
        let norm = next.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = next / C64::new(norm, 0.0);
        if (rayleigh - prev).abs() <= tol * rayleigh {
            return Ok(rayleigh.sqrt());
        }
        prev = rayleigh;
    }
    Err(Error::NoConvergence { iterations: max_iter })
}

/// `min_{x∈X, y∈Y} d(x, y)`.
pub fn support_distance(x: &[usize], y: &[usize], lattice: &Lattice) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySupport);
    }
    for &s in x.iter().chain(y) {
        lattice.check_site(s)?;
    }
    Ok(x.iter()
        .flat_map(|&a| y.iter().map(move |&b| (a, b)))
        .map(|(a, b)| lattice.dist(a, b))
        .fold(f64::INFINITY, f64::min))
}

/// Certified upper bound `2‖H‖ + 2 Σ γ ‖L‖²` on the ∞→∞ norm of the adjoint
/// generator `A ↦ i[H, A] + Σ γ (L†AL − ½{L†L, A})`.
pub fn adjoint_term_norm_upper(h: Option<&CMatrix>, lindblads: &[(CMatrix, f64)]) -> Result<f64> {
    let mut bound = match h {
        Some(h) => 2.0 * operator_norm(h)?,
        None => 0.0,
    };
    for (l, rate) in lindblads {
        if *rate < 0.0 || rate.is_nan() {
            return Err(Error::NegativeRate(*rate));
        }
        let nl = operator_norm(l)?;
        bound += 2.0 * rate * nl * nl;
    }
    Ok(bound)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperoperatorNormBound {
    pub lower: f64,
    pub upper: f64,
}

/// Operator-sum form `T(X) = Σ_m A_m X B_m†`, read off the SVD of the
/// realigned superoperator matrix.
pub fn operator_sum(t: &Superoperator) -> Vec<(CMatrix, CMatrix)> {
    let d = t.dim();
    let s = t.matrix();
    // R[(i + d k), (j + d l)] = S[(i + d j), (k + d l)] = A[i,k] conj(B[j,l])
    let realigned = CMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, k) = (row % d, row / d);
        let (j, l) = (col % d, col / d);
        s[(i + d * j, k + d * l)]
    });
    let svd = realigned.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv > 1e-14 * top.max(f64::MIN_POSITIVE))
        .map(|(m, &sv)| {
            let scale = C64::new(sv.sqrt(), 0.0);
            let a = unvectorize(&(u.column(m).into_owned() * scale), d);
            // Row m of V† is v_m†, so v_m is its conjugate.
            let v_m = v_t.row(m).transpose().map(|z| z.conj());
            let b = unvectorize(&(v_m * scale), d);
            (a, b)
        })
        .collect()
}

fn operator_sum_bound(t: &Superoperator) -> Result<f64> {
    let d = t.dim();
    let mut left = CMatrix::zeros(d, d);
    let mut right = CMatrix::zeros(d, d);
    for (a, b) in operator_sum(t) {
        left += a.adjoint() * &a;
        right += b.adjoint() * &b;
    }
    Ok((operator_norm(&left)? * operator_norm(&right)?).sqrt())
}

/// Two-sided estimate of `‖T‖_{1→1}`.
///
/// The lower value maximizes `‖T(|ψ⟩⟨φ|)‖₁` over rank-one inputs by
/// alternating ascent from `restarts` random starts. The upper value is the
/// smaller of `√dim · ‖T‖_{2→2}` and the operator-sum bound
/// `‖Σ A†A‖^½ ‖Σ B†B‖^½`.
pub fn superop_norm_1to1_estimate(t: &Superoperator, restarts: usize, seed: u64) -> Result<SuperoperatorNormBound> {
    let d = t.dim();
    if d > ESTIMATOR_DIM_LIMIT {
        return Err(Error::EstimatorDimension {
            dim: d,
            max: ESTIMATOR_DIM_LIMIT,
        });
    }
    let adjoint = t.adjoint();
    let mut lower: f64 = 0.0;
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        lower = lower.max(rank_one_ascent(t, &adjoint, &mut rng)?);
    }
    let two_to_two = singular_values(t.matrix()).into_iter().fold(0.0, f64::max);
    let upper = ((d as f64).sqrt() * two_to_two).min(operator_sum_bound(t)?);
    Ok(SuperoperatorNormBound {
        lower: lower.min(upper),
        upper,
    })
}

/// `‖T‖_{∞→∞}` estimated as the 1→1 estimate of `T†`.
pub fn superop_norm_inf_estimate(t: &Superoperator, restarts: usize, seed: u64) -> Result<SuperoperatorNormBound> {
    superop_norm_1to1_estimate(&t.adjoint(), restarts, seed)
}

fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn rank_one_ascent(t: &Superoperator, adjoint: &Superoperator, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = t.dim();
    let mut psi = random_unit(d, rng);
    let mut phi = random_unit(d, rng);
    let mut best = 0.0;
    for _ in 0..500 {
        let x = t.apply(&(&psi * phi.adjoint()));
        let svd = x.svd(true, true);
        let value: f64 = svd.singular_values.iter().sum();
        // Polar factor of T(ψφ†) is the best dual witness for the current input.
        let polar = svd.u.expect("U") * svd.v_t.expect("V^T");
        let witness = adjoint.apply(&polar);
        let wsvd = witness.svd(true, true);
        let (idx, _) = wsvd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
        psi = wsvd.u.expect("U").column(idx).into_owned();
        phi = wsvd.v_t.expect("V^T").row(idx).adjoint();
        if value <= best * (1.0 + 1e-12) {
            best = best.max(value);
            break;
        }
        best = value;
    }
    Ok(best)
}

/// Vectorized application helper used by tests and estimators.
pub fn apply_matrix(super_matrix: &CMatrix, op: &CMatrix) -> CMatrix {
    let d = op.nrows();
    unvectorize(&(super_matrix * vectorize(op)), d)
}

/// Random complex matrix with entries uniform in the unit square around 0.
pub fn random_matrix(d: usize, rng: &mut impl Rng) -> CMatrix {
    DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    let a = random_matrix(d, rng);
    (&a + a.adjoint()).map(|z| z * 0.5)
}

/// Haar-ish random unitary from the QR decomposition of a random matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let qr = random_matrix(d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| {
        let z = r[(i, i)];
        if z.norm() > 0.0 {
            z / z.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    }));
    q * phases
}
