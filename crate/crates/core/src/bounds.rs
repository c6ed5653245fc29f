// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Right-hand sides of the power-law Lieb-Robinson bounds, the fitted decay
//! constant `λ₀`, the pair-interaction matrix `J`, and certification of exact
//! commutator curves against the bounds.
//!
//! All bounds take `dt = t − r ≥ 0` and a distance `d(X, Y) > 0`:
//!
//! ```text
//! generic      C (e^{v dt} − 1) / [1 + d]^η          C = ‖K‖‖O‖|X||Y|/p₀,  v = λ₀p₀
//! rescaled     C₁(e^{v₁dt/𝒩} − 1) / [1 + d]^η        C₁ = ‖K‖‖O‖|X||Y|𝒩/p₁, v₁ = λ₀p₁
//! pairwise     ‖K‖‖O‖ [exp(κ J dt)]_{ij}
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SAFETY_FACTOR};
use crate::lindblad::GKSLModel;

pub use crate::expm::matrix_exp;

/// Multiplicative slack before `lhs > rhs` counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormBasis {
    /// Term norms entering the fit are certified upper bounds.
    CertifiedUpper,
}

/// `Σ_{Z ∋ x,y} sup_s ‖𝓛_Z(s)‖ ≤ λ₀ / [1 + d(x,y)]^η` for all `x, y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawCert {
    pub lambda0: f64,
    pub eta: f64,
    pub basis: NormBasis,
    /// Pair attaining the maximum, if any term exists.
    pub argmax: Option<(usize, usize)>,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eta must be finite and positive, got {eta}"
        )));
    }
    Ok(())
}

/// `W[x][y] = Σ_{Z ∋ x,y} sup_s ‖𝓛_Z(s)‖`, with the sup over all times.
pub fn pair_norm_sums(model: &GKSLModel) -> Result<DMatrix<f64>> {
    let n = model.lattice().n_sites();
    let mut w = DMatrix::zeros(n, n);
    for (support, bound) in model.term_norm_bounds(None)? {
        for &x in &support {
            for &y in &support {
                w[(x, y)] += bound;
            }
        }
    }
    Ok(w)
}

/// Smallest `λ₀` for which the power-law condition holds at every pair of
/// sites, coincident sites included, inflated by [`SAFETY_FACTOR`].
pub fn lambda0_fit(model: &GKSLModel, eta: f64) -> Result<PowerLawCert> {
    check_eta(eta)?;
    let lattice = model.lattice();
    let w = pair_norm_sums(model)?;
    let mut best = 0.0;
    let mut argmax = None;
    for x in 0..lattice.n_sites() {
        for y in 0..lattice.n_sites() {
            if w[(x, y)] == 0.0 {
                continue;
            }
            let value = w[(x, y)] / lattice.kernel(x, y, eta);
            if value > best {
                best = value;
                argmax = Some((x, y));
            }
        }
    }
    Ok(PowerLawCert {
        lambda0: best * SAFETY_FACTOR,
        eta,
        basis: NormBasis::CertifiedUpper,
        argmax,
    })
}

impl PowerLawCert {
    /// Re-check the defining inequality by direct summation.
    pub fn holds_for(&self, model: &GKSLModel) -> Result<bool> {
        let lattice = model.lattice();
        let w = pair_norm_sums(model)?;
        let n = lattice.n_sites();
        Ok((0..n).all(|x| (0..n).all(|y| w[(x, y)] <= self.lambda0 * lattice.kernel(x, y, self.eta))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem1Variant {
    GeneralK,
    CommutatorForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Params {
    pub c: f64,
    pub v: f64,
    pub eta: f64,
    pub variant: Theorem1Variant,
}

impl Theorem1Params {
    pub fn general(k_norm: f64, o_norm: f64, x_size: usize, y_size: usize, lambda0: f64, p0: f64, eta: f64) -> Self {
        Self {
            c: k_norm * o_norm * (x_size * y_size) as f64 / p0,
            v: lambda0 * p0,
            eta,
            variant: Theorem1Variant::GeneralK,
        }
    }

    /// `K_X = [·, O_X]`, for which `‖K_X‖ ≤ 2‖O_X‖`.
    pub fn commutator_form(
        o_x_norm: f64,
        o_y_norm: f64,
        x_size: usize,
        y_size: usize,
        lambda0: f64,
        p0: f64,
        eta: f64,
    ) -> Self {
        Self {
            variant: Theorem1Variant::CommutatorForm,
            ..Self::general(2.0 * o_x_norm, o_y_norm, x_size, y_size, lambda0, p0, eta)
        }
    }
}

fn check_dt_dist(dt: f64, dxy: f64) -> Result<()> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be nonnegative, got {dt}")));
    }
    if !(dxy > 0.0) {
        return Err(Error::ZeroDistance);
    }
    Ok(())
}

pub fn theorem1_bound(params: &Theorem1Params, dt: f64, dxy: f64) -> Result<f64> {
    check_dt_dist(dt, dxy)?;
    Ok(params.c * (params.v * dt).exp_m1() / (1.0 + dxy).powf(params.eta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Inputs {
    pub lambda0: f64,
    pub p1: f64,
    pub n_lambda: f64,
    pub k_norm: f64,
    pub o_norm: f64,
    pub x_size: usize,
    pub y_size: usize,
    pub eta: f64,
}

impl Theorem2Inputs {
    pub fn c1(&self) -> f64 {
        self.k_norm * self.o_norm * (self.x_size * self.y_size) as f64 * self.n_lambda / self.p1
    }

    pub fn v1(&self) -> f64 {
        self.lambda0 * self.p1
    }

    /// `𝒩_Λ → 2^η`, with `p₁ = 2^η p₀` so that `p₁/𝒩_Λ = p₀` is kept.
    pub fn size_independent(&self, p0: f64) -> Self {
        let n = 2f64.powf(self.eta);
        Self {
            n_lambda: n,
            p1: n * p0,
            ..*self
        }
    }
}

pub fn theorem2_bound(inputs: &Theorem2Inputs, dt: f64, dxy: f64) -> Result<f64> {
    check_dt_dist(dt, dxy)?;
    let exponent = inputs.v1() * dt / inputs.n_lambda;
    Ok(inputs.c1() * exponent.exp_m1() / (1.0 + dxy).powf(inputs.eta))
}

/// Pair-interaction matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct JMatrix {
    pub j: DMatrix<f64>,
    pub kappa: f64,
    /// Single-site generator terms were present and left out of `J`.
    pub onsite_excluded: bool,
}

impl JMatrix {
    /// Symmetric off-diagonal entries; diagonal set to one.
    pub fn from_couplings(mut j: DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: j.ncols(),
            });
        }
        for k in 0..n {
            j[(k, k)] = 1.0;
        }
        let kappa = (0..n)
            .map(|a| (0..n).filter(|&b| b != a).map(|b| j[(a, b)]).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            j,
            kappa,
            onsite_excluded: false,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.j.nrows()
    }

    /// The power-series majorant `c_n ≤ κⁿ[Jⁿ]` needs `κ ≥ 1`: for `n = 1`
    /// it reads `J_ij ≤ κ J_ij`.
    pub fn kappa_below_one(&self) -> bool {
        self.kappa < 1.0
    }
}

/// `J_kl = Σ sup_{s∈[r,t]} ‖𝓛_{k,l}(s)‖` over two-site terms.
pub fn build_j_matrix(model: &GKSLModel, window: (f64, f64)) -> Result<JMatrix> {
    let n = model.lattice().n_sites();
    let mut j = DMatrix::zeros(n, n);
    let mut onsite = false;
    for (support, bound) in model.term_norm_bounds(Some(window))? {
        match support.as_slice() {
            [_] => onsite = true,
            &[a, b] => {
                j[(a, b)] += bound;
                j[(b, a)] += bound;
            }
            _ => return Err(Error::NonPairwise(support.len())),
        }
    }
    let mut jm = JMatrix::from_couplings(j)?;
    jm.onsite_excluded = onsite;
    Ok(jm)
}

pub fn theorem3_bound(jm: &JMatrix, k_norm: f64, o_norm: f64, dt: f64, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::CoincidentSites(i));
    }
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be nonnegative, got {dt}")));
    }
    let n = jm.n_sites();
    if i >= n || j >= n {
        return Err(Error::SupportOutOfRange {
            site: i.max(j),
            n_sites: n,
        });
    }
    let e = matrix_exp(&(&jm.j * (jm.kappa * dt)))?;
    Ok(k_norm * o_norm * e[(i, j)])
}

/// `c₂` as the three path sums over `J` with loops excluded.
pub fn c2_explicit(j: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let n = j.nrows();
    let mut s = 0.0;
    for k in (0..n).filter(|&k| k != a && k != b) {
        s += j[(a, k)] * j[(k, b)];
    }
    for k in (0..n).filter(|&k| k != a) {
        s += j[(a, k)] * j[(a, b)];
    }
    for k in (0..n).filter(|&k| k != b) {
        s += j[(a, b)] * j[(k, b)];
    }
    s
}

/// `c₃` as the seven path sums over `J` with loops excluded.
pub fn c3_explicit(j: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let n = j.nrows();
    let sites = || 0..n;
    let mut s = 0.0;
    for k in sites().filter(|&k| k != a) {
        for l in sites().filter(|&l| l != k && l != b) {
            s += j[(a, k)] * j[(k, l)] * j[(l, b)];
        }
    }
    for k in sites().filter(|&k| k != a) {
        for l in sites().filter(|&l| l != a) {
            s += j[(a, k)] * j[(a, l)] * j[(a, b)];
        }
    }
    for k in sites().filter(|&k| k != a) {
        for l in sites().filter(|&l| l != b) {
            s += j[(a, k)] * j[(a, b)] * j[(l, b)];
        }
    }
    for k in sites().filter(|&k| k != b) {
        for l in sites().filter(|&l| l != b) {
            s += j[(a, b)] * j[(k, b)] * j[(l, b)];
        }
    }
    for k in sites().filter(|&k| k != a) {
        for l in sites().filter(|&l| l != a && l != b) {
            s += j[(a, k)] * j[(a, l)] * j[(l, b)];
        }
    }
    for k in sites().filter(|&k| k != a && k != b) {
        for l in sites().filter(|&l| l != k) {
            s += j[(a, k)] * j[(l, k)] * j[(k, b)];
        }
    }
    for k in sites().filter(|&k| k != a && k != b) {
        for l in sites().filter(|&l| l != k) {
            s += j[(a, k)] * j[(k, b)] * j[(l, b)];
        }
    }
    s
}

/// `c_n` by enumerating chains of two-site supports `Z₁ ∋ a`,
/// `Z_{m+1} ∩ Z_m ≠ ∅`, `Z_n ∋ b`, weighted by `Π J_{Z_m}`.
pub fn c_n_paths(j: &DMatrix<f64>, n: usize, a: usize, b: usize) -> f64 {
    let sites = j.nrows();
    let edges: Vec<(usize, usize)> = (0..sites)
        .flat_map(|p| (p + 1..sites).map(move |q| (p, q)))
        .filter(|&(p, q)| j[(p, q)] != 0.0)
        .collect();
    if n == 0 || edges.is_empty() {
        return 0.0;
    }
    let touches = |e: (usize, usize), s: usize| e.0 == s || e.1 == s;
    let meets = |e: (usize, usize), f: (usize, usize)| touches(f, e.0) || touches(f, e.1);
    let mut weight: Vec<f64> = edges
        .iter()
        .map(|&e| if touches(e, a) { j[(e.0, e.1)] } else { 0.0 })
        .collect();
    for _ in 1..n {
        weight = edges
            .iter()
            .map(|&f| {
                let into: f64 = edges
                    .iter()
                    .zip(&weight)
                    .filter(|(&e, _)| meets(e, f))
                    .map(|(_, w)| w)
                    .sum();
                into * j[(f.0, f.1)]
            })
            .collect();
    }
    edges
        .iter()
        .zip(&weight)
        .filter(|(&e, _)| touches(e, b))
        .map(|(_, w)| w)
        .sum()
}

/// Comparison of one exact value with one bound value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    /// `rhs / lhs`, infinite when `lhs = 0`.
    pub slack: f64,
    pub violation: bool,
}

pub fn certify_point(lhs: f64, rhs: f64) -> Certification {
    Certification {
        slack: if lhs == 0.0 { f64::INFINITY } else { rhs / lhs },
        violation: lhs > rhs * (1.0 + VIOLATION_TOL),
    }
}

/// Pointwise comparison of two curves sampled on the same grid.
pub fn certify(lhs: &[(f64, f64)], rhs: &[(f64, f64)]) -> Result<Vec<Certification>> {
    if lhs.len() != rhs.len() {
        return Err(Error::GridMismatch {
            lhs: lhs.len(),
            rhs: rhs.len(),
        });
    }
    lhs.iter()
        .zip(rhs)
        .map(|(&(rl, l), &(rr, r))| {
            if (rl - rr).abs() > 1e-12 * rl.abs().max(1.0) {
                Err(Error::GridMismatch {
                    lhs: lhs.len(),
                    rhs: rhs.len(),
                })
            } else {
                Ok(certify_point(l, r))
            }
        })
        .collect()
}

/// First `dt` at which each distance's curve reaches `epsilon`, linearly
/// interpolated between grid points. Distances never reaching it are left
/// out. Curves are `(dt, value)` with `dt` ascending.
pub fn lightcone_arrivals(field: &[(f64, Vec<(f64, f64)>)], epsilon: f64) -> Result<Vec<(f64, f64)>> {
    if !(epsilon > 0.0) {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    let mut out = Vec::new();
    for (distance, curve) in field {
        let Some(idx) = curve.iter().position(|&(_, v)| v >= epsilon) else {
            continue;
        };
        let arrival = if idx == 0 {
            curve[0].0
        } else {
            let (t0, v0) = curve[idx - 1];
            let (t1, v1) = curve[idx];
            t0 + (epsilon - v0) / (v1 - v0) * (t1 - t0)
        };
        out.push((*distance, arrival));
    }
    Ok(out)
}

/// One certified grid point of a bound sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub d: f64,
    pub t: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: [Option<f64>; 3],
    pub slack: [Option<f64>; 3],
    pub flags: Vec<String>,
}

impl BoundRow {
    pub fn violations(&self) -> usize {
        self.rhs
            .iter()
            .flatten()
            .filter(|&&rhs| certify_point(self.lhs, rhs).violation)
            .count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub lightcone: Vec<(f64, f64)>,
}

impl BoundReport {
    pub fn violation_count(&self) -> usize {
        self.rows.iter().map(BoundRow::violations).sum()
    }

    /// Largest finite slack per theorem.
    pub fn max_slack(&self) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        for row in &self.rows {
            for (k, s) in row.slack.iter().enumerate() {
                if let Some(s) = s.filter(|s| s.is_finite()) {
                    out[k] = Some(out[k].map_or(s, |m: f64| m.max(s)));
                }
            }
        }
        out
    }

    /// Smallest slack per theorem.
    pub fn min_slack(&self) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        for row in &self.rows {
            for (k, s) in row.slack.iter().enumerate() {
                if let Some(s) = *s {
                    out[k] = Some(out[k].map_or(s, |m: f64| m.min(s)));
                }
            }
        }
        out
    }
}

/// Distance between site sets, as used by the bounds.
pub fn set_distance(lattice: &Lattice, x: &[usize], y: &[usize]) -> Result<f64> {
    crate::operators::support_distance(x, y, lattice)
}
