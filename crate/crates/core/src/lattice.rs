// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Finite lattices with a metric, and the power-law kernel constants that
//! parameterize every bound.
//!
//! All constants are built from the kernel `k(x, y) = [1 + d(x, y)]^(-η)`:
//!
//! * `p0`: smallest constant with `Σ_z k(x,z) k(z,y) ≤ p0 k(x,y)` for all
//!   pairs, including `x = y`;
//! * `extensivity_sup = sup_x Σ_y k(x,y)`;
//! * `n_lambda = 1 / sup_x Σ_{y≠x} k(x,y)`;
//! * `p1 = n_lambda · p0`, the smallest constant in the rescaled
//!   convolution inequality.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplicative slack applied to fitted constants before they are used as
/// certificates.
pub const SAFETY_FACTOR: f64 = 1.0 + 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Geometry {
    Chain { sides: Vec<usize> },
    Grid { sides: Vec<usize> },
}

impl Geometry {
    pub fn chain(n: usize) -> Self {
        Geometry::Chain { sides: vec![n] }
    }

    pub fn grid(sides: &[usize]) -> Self {
        Geometry::Grid { sides: sides.to_vec() }
    }

    pub fn sides(&self) -> &[usize] {
        match self {
            Geometry::Chain { sides } | Geometry::Grid { sides } => sides,
        }
    }

    pub fn dimension(&self) -> usize {
        self.sides().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Shortest-path length on the nearest-neighbour graph.
    Graph,
    Manhattan,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    geometry: Geometry,
    metric: MetricKind,
    coords: Vec<Vec<usize>>,
    dist: Vec<f64>,
}

impl Lattice {
    pub fn new(geometry: Geometry, metric: MetricKind) -> Result<Self> {
        let sides = geometry.sides().to_vec();
        if sides.is_empty() {
            return Err(Error::InvalidGeometry("no side lengths given".into()));
        }
        if let Geometry::Chain { sides } = &geometry {
            if sides.len() != 1 {
                return Err(Error::InvalidGeometry(format!(
                    "a chain has one side length, got {}",
                    sides.len()
                )));
            }
        }
        if let Some(pos) = sides.iter().position(|&s| s == 0) {
            return Err(Error::InvalidGeometry(format!("side {pos} has zero length")));
        }
        let n: usize = sides.iter().product();

        // Site index is row-major with the last coordinate fastest.
        let coords: Vec<Vec<usize>> = (0..n)
            .map(|mut idx| {
                let mut c = vec![0; sides.len()];
                for (axis, &len) in sides.iter().enumerate().rev() {
                    c[axis] = idx % len;
                    idx /= len;
                }
                c
            })
            .collect();

        let dist = match metric {
            MetricKind::Graph => graph_distances(&sides, &coords),
            MetricKind::Manhattan => pairwise(&coords, |a, b| {
                a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as f64).sum()
            }),
            MetricKind::Euclidean => pairwise(&coords, |a, b| {
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| (x.abs_diff(y) as f64).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }),
        };

        Ok(Self {
            geometry,
            metric,
            coords,
            dist,
        })
    }

    pub fn chain(n: usize) -> Result<Self> {
        Self::new(Geometry::chain(n), MetricKind::Graph)
    }

    pub fn n_sites(&self) -> usize {
        self.coords.len()
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn coords(&self, site: usize) -> &[usize] {
        &self.coords[site]
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n_sites() + y]
    }

    /// `[1 + d(x, y)]^(-η)`.
    #[inline]
    pub fn kernel(&self, x: usize, y: usize, eta: f64) -> f64 {
        (1.0 + self.dist(x, y)).powf(-eta)
    }

    fn kernel_matrix(&self, eta: f64) -> Vec<f64> {
        self.dist.iter().map(|d| (1.0 + d).powf(-eta)).collect()
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            Err(Error::SupportOutOfRange {
                site,
                n_sites: self.n_sites(),
            })
        } else {
            Ok(())
        }
    }
}

fn pairwise(coords: &[Vec<usize>], f: impl Fn(&[usize], &[usize]) -> f64) -> Vec<f64> {
    let n = coords.len();
    let mut d = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            d[x * n + y] = f(&coords[x], &coords[y]);
        }
    }
    d
}

fn graph_distances(sides: &[usize], coords: &[Vec<usize>]) -> Vec<f64> {
    let n = coords.len();
    let index = |c: &[usize]| c.iter().zip(sides).fold(0, |acc, (&x, &len)| acc * len + x);
    let neighbours = |site: usize| {
        let c = &coords[site];
        let mut out = Vec::with_capacity(2 * sides.len());
        for axis in 0..sides.len() {
            if c[axis] > 0 {
                let mut m = c.clone();
                m[axis] -= 1;
                out.push(index(&m));
            }
            if c[axis] + 1 < sides[axis] {
                let mut m = c.clone();
                m[axis] += 1;
                out.push(index(&m));
            }
        }
        out
    };

    let mut d = vec![f64::INFINITY; n * n];
    let mut queue = VecDeque::new();
    for src in 0..n {
        d[src * n + src] = 0.0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = d[src * n + u];
            for v in neighbours(u) {
                if d[src * n + v].is_infinite() {
                    d[src * n + v] = du + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    d
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "decay exponent must be positive, got {eta}"
        )))
    }
}

/// Smallest `p0` with `Σ_z k(x,z) k(z,y) ≤ p0 k(x,y)` for every pair `x, y`.
pub fn p0_constant(lattice: &Lattice, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let n = lattice.n_sites();
    let k = lattice.kernel_matrix(eta);
    // Row maxima in fixed site order keep the reduction deterministic.
    let best = (0..n)
        .map(|x| {
            let row = &k[x * n..(x + 1) * n];
            (0..n)
                .map(|y| {
                    let conv: f64 = (0..n).map(|z| row[z] * k[z * n + y]).sum();
                    conv / k[x * n + y]
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    Ok(best)
}

/// `sup_x Σ_y [1 + d(x,y)]^(-η)`, the `y = x` term included.
pub fn extensivity_sup(lattice: &Lattice, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(row_sup(lattice, eta, true))
}

fn row_sup(lattice: &Lattice, eta: f64, include_self: bool) -> f64 {
    let n = lattice.n_sites();
    (0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| include_self || y != x)
                .map(|y| lattice.kernel(x, y, eta))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `1 / sup_x Σ_{y≠x} [1 + d(x,y)]^(-η)`.
pub fn n_lambda(lattice: &Lattice, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    if lattice.n_sites() < 2 {
        return Err(Error::SingleSite);
    }
    Ok(1.0 / row_sup(lattice, eta, false))
}

pub fn p1_constant(lattice: &Lattice, eta: f64) -> Result<f64> {
    Ok(n_lambda(lattice, eta)? * p0_constant(lattice, eta)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionConstants {
    pub eta: f64,
    pub p0: f64,
    /// Absent on single-site lattices.
    pub p1: Option<f64>,
    pub n_lambda: Option<f64>,
    pub extensivity_sup: f64,
}

impl AssumptionConstants {
    pub fn compute(lattice: &Lattice, eta: f64) -> Result<Self> {
        let p0 = p0_constant(lattice, eta)?;
        let (n_lambda, p1) = match n_lambda(lattice, eta) {
            Ok(nl) => (Some(nl), Some(nl * p0)),
            Err(Error::SingleSite) => (None, None),
            Err(e) => return Err(e),
        };
        Ok(Self {
            eta,
            p0,
            p1,
            n_lambda,
            extensivity_sup: extensivity_sup(lattice, eta)?,
        })
    }
}
