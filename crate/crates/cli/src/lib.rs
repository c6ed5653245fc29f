// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Config-driven verification runs behind the `liebrob` binary.

pub mod assumptions;
pub mod config;
pub mod harmonic;
pub mod output;
pub mod spin;

use std::path::{Path, PathBuf};

use anyhow::Result;

use crate::config::{ModelConfig, RunConfig};
use crate::output::Outputs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Assumptions,
    VerifySpin,
    VerifyHarmonic,
    Lightcone,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub guard_dim: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outputs: Outputs,
    pub violations: usize,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        if self.violations > 0 {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        }
    }
}

/// Compute everything in memory; nothing touches the disk.
pub fn execute(command: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<RunResult> {
    match command {
        Command::Assumptions => assumptions::run(cfg, opts),
        Command::VerifySpin => spin::verify(cfg, opts),
        Command::VerifyHarmonic => harmonic::verify(cfg, opts),
        Command::Lightcone => match &cfg.model {
            Some(ModelConfig::Harmonic(_)) => harmonic::lightcone(cfg, opts),
            _ => spin::lightcone(cfg, opts),
        },
    }
}

/// Load, execute and write outputs to `out`, or to the configured output
/// directory when `out` is `None`.
pub fn run(command: Command, config: &Path, out: Option<&Path>, opts: &RunOptions) -> Result<RunResult> {
    let cfg = RunConfig::load(config)?;
    let result = execute(command, &cfg, opts)?;
    let dir: PathBuf = match (out, &cfg.output.directory) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => anyhow::bail!("no output directory: pass --out or set output.directory"),
    };
    result.outputs.write_all(&dir)?;
    Ok(result)
}
