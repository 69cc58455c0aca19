//! `cylbif`: bifurcation analysis of one-dimensional solutions on cylinders.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
//! non-convergence, 4 no solution or no branch, 64 usage error.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};
use serde_json::json;

use cylbif_core::Error;

use crate::commands::Context;
use crate::output::Output;

#[derive(Parser)]
#[command(
    name = "cylbif",
    version,
    about = "Bifurcation analysis of one-dimensional solutions on cylinders"
)]
struct Cli {
    /// JSON run configuration; defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized checks and eigen-solver start blocks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Sample the nonlinearity and test superlinearity and sign.
    CheckF,
    /// Shoot for the one-dimensional profile with `nodal_n` nodal intervals.
    Solve1d,
    /// Linearized one-dimensional spectrum with Richardson extrapolation.
    Spectrum1d,
    /// Neumann eigenvalues of the base domain up to `cutoff`.
    BaseEigs,
    /// Morse index at `t_eval` and along `t_range`.
    Morse,
    /// Scalings at which the one-dimensional solution is degenerate.
    BifurcationPoints,
    /// Compare the 2D spectrum with the composed one (interval base).
    VerifyDecomposition,
    /// Follow the bifurcating branch (interval base).
    Continue,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CheckF => "check-f",
            Command::Solve1d => "solve-1d",
            Command::Spectrum1d => "spectrum-1d",
            Command::BaseEigs => "base-eigs",
            Command::Morse => "morse",
            Command::BifurcationPoints => "bifurcation-points",
            Command::VerifyDecomposition => "verify-decomposition",
            Command::Continue => "continue",
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Convergence { .. } | Error::Overflow { .. } => 3,
                Error::NoSolution(_) | Error::BranchNotFound(_) => 4,
                Error::Validation(_)
                | Error::Domain(_)
                | Error::DegenerateInput(_)
                | Error::InsufficientSpectrum(_)
                | Error::Coverage(_)
                | Error::Resource(_)
                | Error::InvalidKernel(_) => 2,
            };
        }
    }
    2
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let loaded = config::load(cli.config.as_deref())?;
    let mut cfg = loaded.config;
    if let Some(dir) = &cli.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if let Some(k) = cli.threads {
        if k == 0 {
            anyhow::bail!(Error::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    let out = Output::create(&cfg.output_dir)?;
    let ctx = Context { cfg: &cfg, out: &out };
    let results = match cli.command {
        Command::CheckF => commands::check_f(&ctx),
        Command::Solve1d => commands::solve_1d(&ctx),
        Command::Spectrum1d => commands::spectrum_1d(&ctx),
        Command::BaseEigs => commands::base_eigs(&ctx),
        Command::Morse => commands::morse(&ctx),
        Command::BifurcationPoints => commands::bifurcation_points(&ctx),
        Command::VerifyDecomposition => commands::verify_decomposition_cmd(&ctx),
        Command::Continue => commands::continue_cmd(&ctx),
    };
    let (status, report) = match &results {
        Ok(v) => ("ok", v.clone()),
        Err(e) => ("error", json!({ "error": format!("{e:#}"), "exit_code": exit_code(e) })),
    };
    let summary = json!({
        "subcommand": cli.command.name(),
        "status": status,
        "schema_version": cfg.schema_version,
        "config_hash": loaded.hash,
        "grids": cfg.grids,
        "tolerances": cfg.tolerances,
        "default_tol_zero_rule": "1e-8 * max(1, |alpha_1|)",
        "newton": cfg.newton(),
        "eigen": cfg.eigen(),
        "shooting": cfg.shooting(),
        "continuation": cfg.continuation,
        "config": cfg,
        "results": report,
    });
    out.json("summary.json", &summary)?;
    results.map(|_| ())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CYLBIF_LOG", "warn")).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
