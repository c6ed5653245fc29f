// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-model runs: exact commutator curves against the three bounds.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use liebrob_core::bounds::{
    build_j_matrix, certify_point, lambda0_fit, lightcone_arrivals, set_distance, theorem1_bound, theorem2_bound,
    theorem3_bound, BoundReport, BoundRow, JMatrix, PowerLawCert, Theorem1Params, Theorem2Inputs,
};
use liebrob_core::expm_multiply;
use liebrob_core::lattice::AssumptionConstants;
use liebrob_core::linalg::{trace, CMatrix, C64};
use liebrob_core::lindblad::{
    build_adjoint_generator, build_generator, commutator_norm_field, heisenberg_evolve, schrodinger_evolve, GKSLModel,
    DEFAULT_MAX_STEP, DOUBLING_TOL,
};
use liebrob_core::operators::{operator_norm, random_hermitian, random_matrix, Operator};
use liebrob_core::Error as CoreError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{cell, lightcone_csv, lightcone_monotone, opt_cell, sites, Csv, Outputs};
use crate::{RunOptions, RunResult};

type Curve = Vec<(f64, f64)>;

/// Step halvings tried before a time-dependent curve is flagged.
pub const MAX_REFINEMENTS: usize = 6;

/// Exact curve for one `(X, Y)` pair.
#[derive(Debug, Clone)]
pub struct PairCurve {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub d: f64,
    pub o_x_norm: f64,
    pub o_y_norm: f64,
    /// `(r, ‖[τ(r,t) O_Y, O_X]‖)` in grid order.
    pub curve: Vec<(f64, f64)>,
    /// Step-doubling discrepancy per grid point; `None` for exact propagation.
    pub residual: Option<Vec<f64>>,
}

pub struct SpinSetup {
    pub model: GKSLModel,
    pub constants: AssumptionConstants,
    pub cert: PowerLawCert,
    pub fitted_lambda0: f64,
}

pub fn setup(cfg: &RunConfig, opts: &RunOptions) -> Result<SpinSetup> {
    let model = cfg.build_spin_model(opts.guard_dim)?;
    model.check_guard()?;
    let constants = AssumptionConstants::compute(model.lattice(), cfg.eta)?;
    let fit = lambda0_fit(&model, cfg.eta)?;
    let fitted_lambda0 = fit.lambda0;
    let cert = match cfg.lambda0 {
        None => fit,
        Some(user) => {
            let cert = PowerLawCert { lambda0: user, ..fit };
            if !cert.holds_for(&model)? {
                bail!(
                    "lambda0 = {user} does not satisfy the power-law condition at eta = {}; \
                     the smallest admissible value is {fitted_lambda0}",
                    cfg.eta
                );
            }
            cert
        }
    };
    Ok(SpinSetup {
        model,
        constants,
        cert,
        fitted_lambda0,
    })
}

/// Exact curves for every configured pair.
pub fn pair_curves(cfg: &RunConfig, model: &GKSLModel, t: f64, r_grid: &[f64]) -> Result<Vec<PairCurve>> {
    let lattice = model.lattice();
    let pairs = cfg.observable_pairs(lattice, model.dim_per_site())?;
    let refs: Vec<(&Operator, &Operator)> = pairs.iter().map(|(x, y)| (x, y)).collect();
    let mut step = DEFAULT_MAX_STEP;
    let mut coarse = commutator_norm_field(model, &refs, t, r_grid, step)?;
    let by_index: Vec<(Curve, Option<Vec<f64>>)> = if model.is_time_independent() {
        coarse.into_iter().map(|c| (c, None)).collect()
    } else {
        // Halve the midpoint step until two successive grids agree.
        let mut refinements = 0;
        loop {
            step /= 2.0;
            let fine = commutator_norm_field(model, &refs, t, r_grid, step)?;
            let residuals: Vec<Vec<f64>> = coarse
                .iter()
                .zip(&fine)
                .map(|(c, f)| c.iter().zip(f).map(|(a, b)| (a.1 - b.1).abs()).collect())
                .collect();
            refinements += 1;
            let worst = residuals.iter().flatten().copied().fold(0.0, f64::max);
            if worst <= DOUBLING_TOL || refinements == MAX_REFINEMENTS {
                break fine.into_iter().zip(residuals).map(|(f, r)| (f, Some(r))).collect();
            }
            coarse = fine;
        }
    };
    pairs
        .iter()
        .zip(by_index)
        .map(|((ox, oy), entry)| {
            let (curve, residual) = entry;
            Ok(PairCurve {
                x: ox.support().to_vec(),
                y: oy.support().to_vec(),
                d: set_distance(lattice, ox.support(), oy.support())?,
                o_x_norm: operator_norm(ox.matrix())?,
                o_y_norm: operator_norm(oy.matrix())?,
                curve,
                residual,
            })
        })
        .collect()
}

/// `max |Tr[ρ(t)A] − Tr[ρ(0)A(0)]|` over random states and observables.
pub fn duality_residual(model: &GKSLModel, t: f64, samples: usize, seed: u64) -> Result<f64> {
    let dim = model.check_guard()?;
    let steps = ((t / DEFAULT_MAX_STEP).ceil() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let g = random_matrix(dim, &mut rng);
        let rho: CMatrix = &g * g.adjoint();
        let rho = &rho / trace(&rho);
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        pairs.push((rho, random_hermitian(dim, &mut rng)));
    }
    let evolved: Vec<(CMatrix, CMatrix)> = if model.is_time_independent() {
        // One propagation per picture with the samples as columns.
        let stack =
            |ms: Vec<&CMatrix>| CMatrix::from_iterator(dim * dim, ms.len(), ms.iter().flat_map(|m| m.iter().copied()));
        let rhos = stack(pairs.iter().map(|p| &p.0).collect());
        let obs = stack(pairs.iter().map(|p| &p.1).collect());
        let rho_t = expm_multiply(build_generator(model, 0.0)?.matrix(), &rhos, t)?;
        let a_0 = expm_multiply(build_adjoint_generator(model, 0.0)?.matrix(), &obs, t)?;
        (0..samples)
            .map(|k| {
                let col = |m: &CMatrix| CMatrix::from_column_slice(dim, dim, m.column(k).as_slice());
                (col(&rho_t), col(&a_0))
            })
            .collect()
    } else {
        pairs
            .iter()
            .map(|(rho, a)| {
                Ok((
                    schrodinger_evolve(model, rho, 0.0, t, steps)?.operator,
                    heisenberg_evolve(model, a, 0.0, t, steps)?.operator,
                ))
            })
            .collect::<Result<_, CoreError>>()?
    };
    Ok(pairs
        .iter()
        .zip(&evolved)
        .map(|((rho, a), (rho_t, a_0))| (trace(&(rho_t * a)) - trace(&(rho * a_0))).norm())
        .fold(0.0, f64::max))
}

/// Per-distance maximum of the exact curves against `Δt = t − r`.
pub fn distance_field(curves: &[PairCurve], t: f64) -> Vec<(f64, Vec<(f64, f64)>)> {
    let mut field: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for pc in curves {
        let mut pts: Vec<(f64, f64)> = pc.curve.iter().map(|&(r, v)| (t - r, v)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let entry = field.entry(pc.d.to_bits()).or_insert_with(|| pts.clone());
        for (e, p) in entry.iter_mut().zip(&pts) {
            e.1 = e.1.max(p.1);
        }
    }
    let mut out: Vec<(f64, Vec<(f64, f64)>)> = field.into_iter().map(|(d, c)| (f64::from_bits(d), c)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

enum JState {
    Ok(JMatrix),
    NonPairwise,
}

pub fn verify(cfg: &RunConfig, opts: &RunOptions) -> Result<RunResult> {
    let SpinSetup {
        model,
        constants,
        cert,
        fitted_lambda0,
    } = setup(cfg, opts)?;
    let time = cfg.time()?;
    let t = time.t;
    let r_grid = time.r_grid()?;
    let curves = pair_curves(cfg, &model, t, &r_grid)?;
    let epsilon = cfg.thresholds.epsilon;
    let eta = cfg.eta;
    let p0 = constants.p0;

    // J depends on r through the window [r, t].
    let j_by_r: Vec<JState> = r_grid
        .iter()
        .map(|&r| match build_j_matrix(&model, (r, t)) {
            Ok(j) => Ok(JState::Ok(j)),
            Err(CoreError::NonPairwise(_)) => Ok(JState::NonPairwise),
            Err(e) => Err(e),
        })
        .collect::<Result<_, CoreError>>()?;

    let mut rows = Vec::new();
    let mut unconverged = 0usize;
    for pc in &curves {
        let t1 =
            Theorem1Params::commutator_form(pc.o_x_norm, pc.o_y_norm, pc.x.len(), pc.y.len(), cert.lambda0, p0, eta);
        let t2 = match (constants.n_lambda, constants.p1) {
            (Some(n_lambda), Some(p1)) => Some(Theorem2Inputs {
                lambda0: cert.lambda0,
                p1,
                n_lambda,
                k_norm: 2.0 * pc.o_x_norm,
                o_norm: pc.o_y_norm,
                x_size: pc.x.len(),
                y_size: pc.y.len(),
                eta,
            }),
            _ => None,
        };
        for (k, &(r, lhs)) in pc.curve.iter().enumerate() {
            let dt = t - r;
            let mut flags = Vec::new();
            let rhs1 = theorem1_bound(&t1, dt, pc.d)?;
            let rhs2 = t2.as_ref().map(|p| theorem2_bound(p, dt, pc.d)).transpose()?;
            let rhs3 = match &j_by_r[k] {
                JState::NonPairwise => {
                    flags.push("non_pairwise".to_string());
                    None
                }
                JState::Ok(jm) => {
                    if jm.onsite_excluded {
                        flags.push("onsite_excluded".to_string());
                    }
                    if jm.kappa_below_one() {
                        flags.push("kappa_below_one".to_string());
                        None
                    } else if let ([i], [j]) = (pc.x.as_slice(), pc.y.as_slice()) {
                        Some(theorem3_bound(jm, 2.0 * pc.o_x_norm, pc.o_y_norm, dt, *i, *j)?)
                    } else {
                        flags.push("multi_site".to_string());
                        None
                    }
                }
            };
            if let Some(res) = &pc.residual {
                if res[k] > DOUBLING_TOL {
                    flags.push("unconverged".to_string());
                    unconverged += 1;
                }
            }
            let rhs = [Some(rhs1), rhs2, rhs3];
            let slack = rhs.map(|v| v.map(|v| certify_point(lhs, v).slack));
            rows.push(BoundRow {
                x: pc.x.clone(),
                y: pc.y.clone(),
                d: pc.d,
                t,
                r,
                lhs,
                rhs,
                slack,
                flags,
            });
        }
    }

    let field = distance_field(&curves, t);
    let lightcone = lightcone_arrivals(&field, epsilon)?;
    let report = BoundReport { rows, lightcone };

    let per_theorem: Vec<usize> = (0..3)
        .map(|k| {
            report
                .rows
                .iter()
                .filter(|row| row.rhs[k].is_some_and(|v| certify_point(row.lhs, v).violation))
                .count()
        })
        .collect();
    let violations = report.violation_count();
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let spin = cfg.spin()?;
    let duality = if spin.duality_samples > 0 {
        Some(duality_residual(&model, t, spin.duality_samples, seed).context("duality check")?)
    } else {
        None
    };
    let j0 = match &j_by_r[r_grid.iter().position(|&r| r == 0.0).unwrap_or(0)] {
        JState::Ok(j) => Some(j.kappa),
        JState::NonPairwise => None,
    };
    let max_residual = curves
        .iter()
        .filter_map(|c| c.residual.as_ref())
        .flatten()
        .copied()
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));

    let mut warnings = Vec::new();
    if !lightcone_monotone(&report.lightcone) {
        warnings.push("light-cone arrival times are not monotone in distance".to_string());
    }
    if unconverged > 0 {
        warnings.push(format!("{unconverged} grid points failed the step-doubling check"));
    }

    let summary = json!({
        "command": "verify-spin",
        "n_sites": model.lattice().n_sites(),
        "hilbert_dim": model.check_guard()?,
        "time_independent": model.is_time_independent(),
        "eta": eta,
        "lambda0": cert.lambda0,
        "lambda0_fit": fitted_lambda0,
        "lambda0_argmax": cert.argmax,
        "p0": p0,
        "p1": constants.p1,
        "n_lambda": constants.n_lambda,
        "kappa_at_r0": j0,
        "pairs": curves.len(),
        "rows": report.rows.len(),
        "violations": violations,
        "violations_per_theorem": per_theorem,
        "max_slack": report.max_slack(),
        "min_slack": report.min_slack(),
        "max_doubling_residual": max_residual,
        "duality_residual": duality,
        "seed": seed,
        "epsilon": epsilon,
        "lightcone": report.lightcone,
        "warnings": warnings,
    });

    let mut outputs = Outputs::default();
    outputs.json("constants.json", &crate::assumptions::constants_json(&constants))?;
    outputs.text("report.csv", report_csv(&report));
    outputs.json("summary.json", &summary)?;
    outputs.text("lightcone.csv", lightcone_csv(&report.lightcone, epsilon));
    Ok(RunResult {
        outputs,
        violations,
        warnings,
    })
}

pub fn report_csv(report: &BoundReport) -> String {
    let mut csv = Csv::new(&[
        "X", "Y", "d", "t", "r", "lhs", "rhs1", "rhs2", "rhs3", "slack1", "slack2", "slack3", "flags",
    ]);
    for row in &report.rows {
        let mut cells = vec![
            sites(&row.x),
            sites(&row.y),
            cell(row.d),
            cell(row.t),
            cell(row.r),
            cell(row.lhs),
        ];
        cells.extend(row.rhs.iter().map(|v| opt_cell(*v)));
        cells.extend(row.slack.iter().map(|v| opt_cell(*v)));
        cells.push(row.flags.join("|"));
        csv.row(&cells);
    }
    csv.finish()
}

/// Light-cone table only.
pub fn lightcone(cfg: &RunConfig, opts: &RunOptions) -> Result<RunResult> {
    let model = cfg.build_spin_model(opts.guard_dim)?;
    model.check_guard()?;
    let time = cfg.time()?;
    let r_grid = time.r_grid()?;
    let curves = pair_curves(cfg, &model, time.t, &r_grid)?;
    let epsilon = cfg.thresholds.epsilon;
    let arrivals = lightcone_arrivals(&distance_field(&curves, time.t), epsilon)?;
    let monotone = lightcone_monotone(&arrivals);
    let mut warnings = Vec::new();
    if !monotone {
        warnings.push("light-cone arrival times are not monotone in distance".to_string());
    }
    let mut outputs = Outputs::default();
    outputs.text("lightcone.csv", lightcone_csv(&arrivals, epsilon));
    outputs.json(
        "summary.json",
        &json!({
            "command": "lightcone",
            "model": "spin",
            "epsilon": epsilon,
            "lightcone": arrivals,
            "monotone": monotone,
            "warnings": warnings,
        }),
    )?;
    Ok(RunResult {
        outputs,
        violations: 0,
        warnings,
    })
}
