use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gapfield::experiments::{checks, jikang, narrow, output, sweep, Config};
use serde::Serialize;

#[derive(Parser)]
#[command(version, about = "Field estimates for two nearly touching circular inclusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path; a `.jsonl` mirror is written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Series truncation tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest series index.
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// |D^m u| near the gap over an eps grid and conductivity regimes.
    Sweep,
    /// Sweep maxima against the eps-dependent envelope.
    Jikang,
    /// Gradient decay in the thin strip.
    Narrow,
    /// Interface continuity and harmonicity of the Green's function.
    GreenCheck,
    /// One finite-difference transmission solve, written as x,y,u,a.
    FdSolve,
    /// Conformal reduction on random radii and gaps.
    ConformalCheck,
}

fn emit<T: Serialize>(records: &[T], out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => output::write_both(records, path).with_context(|| format!("writing {}", path.display()))?,
        None => output::write_csv(records, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => Config::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => Config::default(),
    };
    if let Some(tol) = c.tol {
        cfg.series.tol = tol;
    }
    if let Some(k) = c.kmax {
        cfg.series.k_max = k;
    }
    cfg.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = c.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build()?;

    pool.install(|| -> anyhow::Result<()> {
        match cli.command {
            Command::Sweep => emit(&sweep::run_sweep(&cfg), &c.out),
            Command::Jikang => emit(&jikang::run_jikang(&cfg), &c.out),
            Command::Narrow => emit(&narrow::run_narrow(&cfg.narrow), &c.out),
            Command::GreenCheck => emit(&checks::run_green_check(&cfg), &c.out),
            Command::ConformalCheck => emit(&checks::run_conformal_check(&cfg), &c.out),
            Command::FdSolve => {
                let sol = checks::run_fd_solve(&cfg)?;
                eprintln!("{}×{} grid, {} CG iterations, relative residual {:.2e}", sol.nx, sol.ny, sol.iterations, sol.residual);
                match &c.out {
                    Some(path) => sol.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?,
                    None => sol.write_csv(std::io::stdout().lock())?,
                }
                Ok(())
            }
        }
    })
}
