use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use eprlab_cli::config::{parse_config, RunConfig};
use eprlab_cli::{dispatch, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "eprlab",
    version,
    about = "Grid simulations of EPR-type two-particle states"
)]
struct Args {
    #[arg(value_enum)]
    command: Subcommand,
    /// TOML configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel kernels; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => parse_config("")?,
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(args: &Args) -> Result<bool> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = load(args)?;
    dispatch(args.command, &cfg, &cfg.output_dir)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("eprlab: check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("eprlab: {e:#}");
            ExitCode::from(2)
        }
    }
}
