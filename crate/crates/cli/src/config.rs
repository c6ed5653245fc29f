// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration. Unknown keys are rejected everywhere.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use liebrob_core::harmonic::{HarmonicModel, KernelConvention};
use liebrob_core::lattice::{Geometry, Lattice, MetricKind};
use liebrob_core::linalg::{identity, kron, lowering, pauli_x, pauli_y, pauli_z, raising, CMatrix, C64};
use liebrob_core::lindblad::{GKSLModel, TimeProfile, DEFAULT_GUARD_DIM};
use liebrob_core::operators::Operator;
use nalgebra::DMatrix;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub eta: f64,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub observables: Option<ObservablesConfig>,
    #[serde(default)]
    pub thresholds: ThresholdsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Optional user-supplied decay constant, checked against the fit.
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub geometry: Geometry,
    #[serde(default = "default_metric")]
    pub metric: MetricKind,
}

fn default_metric() -> MetricKind {
    MetricKind::Graph
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ModelConfig {
    Spin(SpinConfig),
    Harmonic(HarmonicConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinConfig {
    #[serde(default = "default_local_dim")]
    pub dim_per_site: usize,
    #[serde(default)]
    pub guard_dim: Option<usize>,
    #[serde(default)]
    pub hamiltonian: Vec<HamiltonianTermConfig>,
    #[serde(default)]
    pub lindblad: Vec<LindbladTermConfig>,
    /// `strength / d^decay` on every pair of sites.
    #[serde(default)]
    pub pair_couplings: Vec<PairCouplingConfig>,
    #[serde(default)]
    pub onsite_hamiltonian: Vec<OnsiteHamiltonianConfig>,
    #[serde(default)]
    pub onsite_lindblad: Vec<OnsiteLindbladConfig>,
    /// Random (ρ, A) pairs for the duality diagnostic.
    #[serde(default = "default_duality_samples")]
    pub duality_samples: usize,
}

fn default_local_dim() -> usize {
    2
}

fn default_duality_samples() -> usize {
    4
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianTermConfig {
    pub support: Vec<usize>,
    pub operator: LocalOp,
    #[serde(default = "default_one")]
    pub coefficient: f64,
    #[serde(default)]
    pub profile: TimeProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladTermConfig {
    pub support: Vec<usize>,
    pub operator: LocalOp,
    pub rate: f64,
    #[serde(default)]
    pub profile: TimeProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCouplingConfig {
    pub operator: LocalOp,
    #[serde(default = "default_one")]
    pub strength: f64,
    pub decay: f64,
    #[serde(default)]
    pub profile: TimeProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnsiteHamiltonianConfig {
    pub operator: LocalOp,
    #[serde(default = "default_one")]
    pub coefficient: f64,
    #[serde(default)]
    pub profile: TimeProfile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnsiteLindbladConfig {
    pub operator: LocalOp,
    pub rate: f64,
    #[serde(default)]
    pub profile: TimeProfile,
}

/// A local operator: a named single-qubit matrix, a tensor product, a sum or
/// an explicit matrix of `[re, im]` pairs given row by row.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LocalOp {
    Named(String),
    Factors {
        factors: Vec<LocalOp>,
        #[serde(default = "default_one")]
        coefficient: f64,
    },
    Sum {
        sum: Vec<LocalOp>,
    },
    Matrix {
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

impl LocalOp {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        match self {
            LocalOp::Named(name) => match name.as_str() {
                "pauli_x" => Ok(pauli_x()),
                "pauli_y" => Ok(pauli_y()),
                "pauli_z" => Ok(pauli_z()),
                "raising" => Ok(raising()),
                "lowering" => Ok(lowering()),
                "identity" => Ok(identity(2)),
                other => bail!("unknown operator name `{other}`"),
            },
            LocalOp::Factors { factors, coefficient } => {
                let mut it = factors.iter();
                let first = it.next().ok_or_else(|| anyhow!("empty factor list"))?.to_matrix()?;
                let product = it.try_fold(first, |acc, f| Ok::<_, anyhow::Error>(kron(&acc, &f.to_matrix()?)))?;
                Ok(product * C64::new(*coefficient, 0.0))
            }
            LocalOp::Sum { sum } => {
                let mut it = sum.iter();
                let first = it.next().ok_or_else(|| anyhow!("empty sum"))?.to_matrix()?;
                it.try_fold(first, |acc, term| {
                    let m = term.to_matrix()?;
                    if m.shape() != acc.shape() {
                        bail!("sum terms have different shapes");
                    }
                    Ok(acc + m)
                })
            }
            LocalOp::Matrix { matrix } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|row| row.len() != n) {
                    bail!("explicit matrix must be square and non-empty");
                }
                Ok(CMatrix::from_fn(n, n, |i, j| {
                    C64::new(matrix[i][j][0], matrix[i][j][1])
                }))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub a: RealMatrixInput,
    pub b: RealMatrixInput,
    #[serde(default)]
    pub m: Option<LindbladInput>,
    #[serde(default)]
    pub kernel: KernelConvention,
    /// One CSV row per `(x, y, block, dt)` instead of per `(d, dt)`.
    #[serde(default)]
    pub full_pairs: bool,
}

/// Real symmetric `n x n` coupling matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RealMatrixInput {
    Dense {
        dense: Vec<Vec<f64>>,
    },
    /// Entry `k` applies at distance `k`; zero beyond the band.
    Banded {
        banded: Vec<f64>,
    },
    /// `diagonal` on site, `strength / [1 + d]^decay` off site.
    PowerLaw {
        diagonal: f64,
        strength: f64,
        decay: f64,
    },
}

impl RealMatrixInput {
    pub fn build(&self, lattice: &Lattice) -> Result<DMatrix<f64>> {
        let n = lattice.n_sites();
        match self {
            RealMatrixInput::Dense { dense } => {
                if dense.len() != n || dense.iter().any(|r| r.len() != n) {
                    bail!("dense matrix must be {n}x{n}");
                }
                Ok(DMatrix::from_fn(n, n, |i, j| dense[i][j]))
            }
            RealMatrixInput::Banded { banded } => Ok(DMatrix::from_fn(n, n, |i, j| {
                let d = lattice.dist(i, j);
                let k = d.round() as usize;
                if (d - k as f64).abs() < 1e-12 && k < banded.len() {
                    banded[k]
                } else {
                    0.0
                }
            })),
            RealMatrixInput::PowerLaw {
                diagonal,
                strength,
                decay,
            } => Ok(DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    *diagonal
                } else {
                    strength / (1.0 + lattice.dist(i, j)).powf(*decay)
                }
            })),
        }
    }
}

/// Lindblad coefficient matrix `M` (`n x 2n`).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LindbladInput {
    Dense {
        dense: Vec<Vec<[f64; 2]>>,
    },
    /// `L_v = q Q_v + p P_v`.
    Local {
        local: LocalDamping,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalDamping {
    pub q: [f64; 2],
    pub p: [f64; 2],
}

impl LindbladInput {
    pub fn build(&self, n: usize) -> Result<CMatrix> {
        match self {
            LindbladInput::Dense { dense } => {
                if dense.len() != n || dense.iter().any(|r| r.len() != 2 * n) {
                    bail!("Lindblad matrix must be {n}x{}", 2 * n);
                }
                Ok(CMatrix::from_fn(n, 2 * n, |i, j| {
                    C64::new(dense[i][j][0], dense[i][j][1])
                }))
            }
            LindbladInput::Local { local } => Ok(CMatrix::from_fn(n, 2 * n, |v, j| {
                if j == v {
                    C64::new(local.q[0], local.q[1])
                } else if j == v + n {
                    C64::new(local.p[0], local.p[1])
                } else {
                    C64::new(0.0, 0.0)
                }
            })),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t: f64,
    /// Spin runs: `r` grid on `[0, t]`.
    #[serde(default)]
    pub r_points: Option<usize>,
    /// Harmonic runs: `dt` grid on `[0, t]`.
    #[serde(default)]
    pub dt_points: Option<usize>,
}

impl TimeConfig {
    fn grid(&self, points: Option<usize>, what: &str) -> Result<Vec<f64>> {
        let n = points.ok_or_else(|| anyhow!("time.{what} is required for this command"))?;
        if n < 2 {
            bail!("time.{what} must be at least 2");
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            bail!("time.t must be finite and nonnegative");
        }
        Ok((0..n).map(|k| self.t * k as f64 / (n - 1) as f64).collect())
    }

    pub fn r_grid(&self) -> Result<Vec<f64>> {
        self.grid(self.r_points, "r_points")
    }

    pub fn dt_grid(&self) -> Result<Vec<f64>> {
        self.grid(self.dt_points, "dt_points")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    pub x_operator: LocalOp,
    pub y_operator: LocalOp,
    /// Explicit `(X, Y)` supports; all single-site pairs `x < y` otherwise.
    #[serde(default)]
    pub pairs: Option<Vec<PairConfig>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    1e-2
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<String>,
    /// Accepted for compatibility; CSV and JSON are always written.
    #[serde(default)]
    pub formats: Vec<String>,
}

impl RunConfig {
    /// Parse with errors anchored at `path:line:column`.
    pub fn from_str_at(text: &str, path: &str) -> Result<Self> {
        serde_json::from_str::<RunConfig>(text).map_err(|e| {
            if e.line() > 0 {
                anyhow!("{path}:{}:{}: {e}", e.line(), e.column())
            } else {
                anyhow!("{path}: {e}")
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_str_at(&text, &path.display().to_string())
    }

    pub fn build_lattice(&self) -> Result<Lattice> {
        Ok(Lattice::new(self.lattice.geometry.clone(), self.lattice.metric)?)
    }

    pub fn time(&self) -> Result<&TimeConfig> {
        self.time.as_ref().ok_or_else(|| anyhow!("missing `time` section"))
    }

    pub fn spin(&self) -> Result<&SpinConfig> {
        match &self.model {
            Some(ModelConfig::Spin(s)) => Ok(s),
            Some(ModelConfig::Harmonic(_)) => bail!("this command needs a spin model"),
            None => bail!("missing `model` section"),
        }
    }

    pub fn harmonic(&self) -> Result<&HarmonicConfig> {
        match &self.model {
            Some(ModelConfig::Harmonic(h)) => Ok(h),
            Some(ModelConfig::Spin(_)) => bail!("this command needs a harmonic model"),
            None => bail!("missing `model` section"),
        }
    }

    pub fn build_spin_model(&self, guard_override: Option<usize>) -> Result<GKSLModel> {
        let spin = self.spin()?;
        let lattice = self.build_lattice()?;
        let n = lattice.n_sites();
        let d = spin.dim_per_site;
        let guard = guard_override.or(spin.guard_dim).unwrap_or(DEFAULT_GUARD_DIM);
        let mut model = GKSLModel::new(lattice.clone(), d)?.with_guard_dim(guard);
        let local = |support: Vec<usize>, m: CMatrix, what: &str| {
            Operator::local(d, support, m).with_context(|| format!("invalid {what} term"))
        };
        for (k, term) in spin.hamiltonian.iter().enumerate() {
            let m = term.operator.to_matrix()? * C64::new(term.coefficient, 0.0);
            model
                .add_hamiltonian(local(term.support.clone(), m, "hamiltonian")?, term.profile)
                .with_context(|| format!("model.spin.hamiltonian[{k}]"))?;
        }
        for (k, term) in spin.lindblad.iter().enumerate() {
            let m = term.operator.to_matrix()?;
            model
                .add_lindblad(local(term.support.clone(), m, "lindblad")?, term.rate, term.profile)
                .with_context(|| format!("model.spin.lindblad[{k}]"))?;
        }
        for (k, pc) in spin.pair_couplings.iter().enumerate() {
            let base = pc.operator.to_matrix()?;
            for a in 0..n {
                for b in a + 1..n {
                    let dist = lattice.dist(a, b);
                    let m = &base * C64::new(pc.strength / dist.powf(pc.decay), 0.0);
                    model
                        .add_hamiltonian(local(vec![a, b], m, "pair coupling")?, pc.profile)
                        .with_context(|| format!("model.spin.pair_couplings[{k}]"))?;
                }
            }
        }
        for (k, oh) in spin.onsite_hamiltonian.iter().enumerate() {
            let m = oh.operator.to_matrix()? * C64::new(oh.coefficient, 0.0);
            for s in 0..n {
                model
                    .add_hamiltonian(local(vec![s], m.clone(), "onsite hamiltonian")?, oh.profile)
                    .with_context(|| format!("model.spin.onsite_hamiltonian[{k}]"))?;
            }
        }
        for (k, ol) in spin.onsite_lindblad.iter().enumerate() {
            let m = ol.operator.to_matrix()?;
            for s in 0..n {
                model
                    .add_lindblad(local(vec![s], m.clone(), "onsite lindblad")?, ol.rate, ol.profile)
                    .with_context(|| format!("model.spin.onsite_lindblad[{k}]"))?;
            }
        }
        Ok(model)
    }

    pub fn build_harmonic_model(&self) -> Result<HarmonicModel> {
        let h = self.harmonic()?;
        let lattice = self.build_lattice()?;
        let n = lattice.n_sites();
        let a = h.a.build(&lattice).context("model.harmonic.a")?;
        let b = h.b.build(&lattice).context("model.harmonic.b")?;
        let m = match &h.m {
            Some(input) => input.build(n).context("model.harmonic.m")?,
            None => CMatrix::zeros(n, 2 * n),
        };
        Ok(HarmonicModel::new(lattice, a, b, m)?)
    }

    /// Observable pairs as `(X, O_X, Y, O_Y)` local operators.
    pub fn observable_pairs(&self, lattice: &Lattice, dim_per_site: usize) -> Result<Vec<(Operator, Operator)>> {
        let obs = self
            .observables
            .as_ref()
            .ok_or_else(|| anyhow!("missing `observables` section"))?;
        let ox = obs.x_operator.to_matrix()?;
        let oy = obs.y_operator.to_matrix()?;
        let n = lattice.n_sites();
        let pairs: Vec<(Vec<usize>, Vec<usize>)> = match &obs.pairs {
            Some(p) => p.iter().map(|p| (p.x.clone(), p.y.clone())).collect(),
            None => (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (vec![a], vec![b])))
                .collect(),
        };
        pairs
            .into_iter()
            .enumerate()
            .map(|(k, (x, y))| {
                if x.iter().any(|s| y.contains(s)) {
                    bail!("observables.pairs[{k}]: supports overlap");
                }
                let ox = Operator::local(dim_per_site, x, ox.clone())
                    .with_context(|| format!("observables.pairs[{k}].x"))?;
                let oy = Operator::local(dim_per_site, y, oy.clone())
                    .with_context(|| format!("observables.pairs[{k}].y"))?;
                for s in ox.support().iter().chain(oy.support()) {
                    lattice
                        .check_site(*s)
                        .with_context(|| format!("observables.pairs[{k}]"))?;
                }
                Ok((ox, oy))
            })
            .collect()
    }
}
