// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Harmonic-lattice runs: canonical commutator matrices against the bound.

use std::collections::BTreeMap;

use anyhow::Result;
use liebrob_core::bounds::{certify_point, lightcone_arrivals};
use liebrob_core::harmonic::{
    build_kernel, c0_fit, certify_theorem4, harmonic_commutator_norms, symplecticity_defect, HarmonicCheck,
};
use liebrob_core::lattice::AssumptionConstants;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{cell, lightcone_csv, lightcone_monotone, Csv, Outputs};
use crate::{RunOptions, RunResult};

pub struct HarmonicSweep {
    pub checks: Vec<Vec<HarmonicCheck>>,
    pub c0: f64,
    pub constants: AssumptionConstants,
    pub symplecticity: Option<Vec<(f64, f64)>>,
    pub dissipative_sign_defect: f64,
    pub warnings: Vec<String>,
}

pub fn sweep(cfg: &RunConfig) -> Result<HarmonicSweep> {
    let h = cfg.harmonic()?;
    let model = cfg.build_harmonic_model()?;
    let lattice = model.lattice();
    let eta = cfg.eta;
    let constants = AssumptionConstants::compute(lattice, eta)?;
    let c0 = c0_fit(&model, eta)?;
    let kernel = build_kernel(&model, h.kernel);
    let dt_grid = cfg.time()?.dt_grid()?;
    let mut warnings = Vec::new();
    let dimension = lattice.geometry().dimension();
    if eta <= dimension as f64 {
        warnings.push(format!(
            "eta = {eta} does not exceed the lattice dimension {dimension}; p0 may grow with system size"
        ));
    }
    let checks = dt_grid
        .par_iter()
        .map(|&dt| {
            let cm = harmonic_commutator_norms(&kernel, dt)?;
            certify_theorem4(lattice, &cm, c0, constants.p0, eta)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let symplecticity = if model.is_closed() {
        Some(
            dt_grid
                .iter()
                .map(|&dt| Ok((dt, symplecticity_defect(&kernel, dt)?)))
                .collect::<Result<Vec<_>, liebrob_core::Error>>()?,
        )
    } else {
        None
    };
    Ok(HarmonicSweep {
        checks,
        c0,
        constants,
        symplecticity,
        dissipative_sign_defect: kernel.dissipative_sign_defect(),
        warnings,
    })
}

/// Largest commutator per distance at each `dt`, all blocks pooled.
fn distance_field(checks: &[Vec<HarmonicCheck>]) -> Vec<(f64, Vec<(f64, f64)>)> {
    let mut field: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for (k, at_dt) in checks.iter().enumerate() {
        for c in at_dt {
            let curve = field
                .entry(c.d.to_bits())
                .or_insert_with(|| checks.iter().map(|v| (v.first().map_or(0.0, |c| c.dt), 0.0)).collect());
            curve[k].1 = curve[k].1.max(c.lhs);
        }
    }
    let mut out: Vec<(f64, Vec<(f64, f64)>)> = field.into_iter().map(|(d, c)| (f64::from_bits(d), c)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn report_csv(checks: &[Vec<HarmonicCheck>], full_pairs: bool) -> String {
    let header = ["x", "y", "block", "d", "dt", "lhs", "rhs", "slack"];
    let mut csv = Csv::new(&header);
    let mut emit = |c: &HarmonicCheck| {
        csv.row(&[
            c.x.to_string(),
            c.y.to_string(),
            c.pair.label().to_string(),
            cell(c.d),
            cell(c.dt),
            cell(c.lhs),
            cell(c.rhs),
            cell(certify_point(c.lhs, c.rhs).slack),
        ]);
    };
    for at_dt in checks {
        if full_pairs {
            at_dt.iter().for_each(&mut emit);
            continue;
        }
        // Worst pair per (distance, block).
        let mut worst: BTreeMap<(u64, &str), &HarmonicCheck> = BTreeMap::new();
        for c in at_dt {
            let key = (c.d.to_bits(), c.pair.label());
            let e = worst.entry(key).or_insert(c);
            if c.lhs / c.rhs > e.lhs / e.rhs {
                *e = c;
            }
        }
        let mut rows: Vec<&HarmonicCheck> = worst.into_values().collect();
        rows.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.pair.label().cmp(b.pair.label())));
        rows.into_iter().for_each(&mut emit);
    }
    csv.finish()
}

pub fn verify(cfg: &RunConfig, _opts: &RunOptions) -> Result<RunResult> {
    let h = cfg.harmonic()?;
    let sw = sweep(cfg)?;
    let epsilon = cfg.thresholds.epsilon;
    let all = || sw.checks.iter().flatten();
    let violations = all().filter(|c| certify_point(c.lhs, c.rhs).violation).count();
    let min_slack = all()
        .map(|c| certify_point(c.lhs, c.rhs).slack)
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.min(s))));
    let max_slack = all()
        .map(|c| certify_point(c.lhs, c.rhs).slack)
        .filter(|s| s.is_finite())
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))));
    let arrivals = lightcone_arrivals(&distance_field(&sw.checks), epsilon)?;
    let mut warnings = sw.warnings.clone();
    if !lightcone_monotone(&arrivals) {
        warnings.push("light-cone arrival times are not monotone in distance".to_string());
    }
    let summary = json!({
        "command": "verify-harmonic",
        "n_sites": cfg.build_lattice()?.n_sites(),
        "kernel": h.kernel,
        "eta": cfg.eta,
        "c0": sw.c0,
        "p0": sw.constants.p0,
        "checks": all().count(),
        "violations": violations,
        "min_slack": min_slack,
        "max_slack": max_slack,
        "symplecticity_defect": sw.symplecticity,
        "dissipative_sign_defect": sw.dissipative_sign_defect,
        "epsilon": epsilon,
        "lightcone": arrivals,
        "warnings": warnings,
        "notes": ["x = y pairs are excluded from the comparison"],
    });
    let mut outputs = Outputs::default();
    outputs.json("constants.json", &crate::assumptions::constants_json(&sw.constants))?;
    outputs.text("report.csv", report_csv(&sw.checks, h.full_pairs));
    outputs.json("summary.json", &summary)?;
    outputs.text("lightcone.csv", lightcone_csv(&arrivals, epsilon));
    Ok(RunResult {
        outputs,
        violations,
        warnings,
    })
}

pub fn lightcone(cfg: &RunConfig, _opts: &RunOptions) -> Result<RunResult> {
    let sw = sweep(cfg)?;
    let epsilon = cfg.thresholds.epsilon;
    let arrivals = lightcone_arrivals(&distance_field(&sw.checks), epsilon)?;
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
            "model": "harmonic",
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
