// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Lattice constants for the power-law kernel.

use anyhow::Result;
use liebrob_core::lattice::AssumptionConstants;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::Outputs;
use crate::{RunOptions, RunResult};

pub fn constants_json(c: &AssumptionConstants) -> Value {
    let mut v = json!({
        "eta": c.eta,
        "p0": c.p0,
        "extensivity_sup": c.extensivity_sup,
    });
    match (c.n_lambda, c.p1) {
        (Some(n), Some(p1)) => {
            v["n_lambda"] = json!(n);
            v["p1"] = json!(p1);
        }
        _ => {
            v["note"] = json!("n_lambda and p1 are undefined on a single-site lattice");
        }
    }
    v
}

pub fn run(cfg: &RunConfig, _opts: &RunOptions) -> Result<RunResult> {
    let lattice = cfg.build_lattice()?;
    let constants = AssumptionConstants::compute(&lattice, cfg.eta)?;
    let mut outputs = Outputs::default();
    outputs.json("constants.json", &constants_json(&constants))?;
    Ok(RunResult {
        outputs,
        violations: 0,
        warnings: Vec::new(),
    })
}
