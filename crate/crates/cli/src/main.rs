// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liebrob_cli::{run, Command, RunOptions, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "liebrob", version, about = "Lieb-Robinson bound verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "guard-dim")]
    guard_dim: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lattice constants p0, p1, n_lambda and the extensivity sum.
    Assumptions(Common),
    /// Exact spin commutators against every applicable bound.
    VerifySpin(Common),
    /// Harmonic canonical commutators against their bound.
    VerifyHarmonic(Common),
    /// Arrival times of the commutator front.
    Lightcone(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("LIEBROB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: LIEBROB_THREADS must be a positive integer, got `{v}`");
                return ExitCode::from(EXIT_ERROR as u8);
            }
        }
    }
    let (command, common) = match cli.command {
        Cmd::Assumptions(c) => (Command::Assumptions, c),
        Cmd::VerifySpin(c) => (Command::VerifySpin, c),
        Cmd::VerifyHarmonic(c) => (Command::VerifyHarmonic, c),
        Cmd::Lightcone(c) => (Command::Lightcone, c),
    };
    let opts = RunOptions {
        seed: common.seed,
        guard_dim: common.guard_dim,
    };
    match run(command, &common.config, common.out.as_deref(), &opts) {
        Ok(result) => {
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            if result.violations > 0 {
                eprintln!("{} bound violations", result.violations);
            }
            ExitCode::from(result.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
