//! Library side of the `eprlab` binary: configuration, dispatch, and file
//! output. Exposed so integration tests can drive runs in-process.

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;

use anyhow::Result;
use clap::ValueEnum;

use config::RunConfig;
use output::Output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    State,
    Evolve,
    Discriminate,
    SignalTest,
    KimShih,
    Persistence,
    Bell,
    OracleCheck,
}

/// Runs one subcommand, writing into `dir`. Returns `Ok(false)` when the run
/// completed but failed its own check (only `oracle-check` and `bell` have one).
pub fn dispatch(cmd: Subcommand, cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let mut out = Output::create(dir)?;
    match cmd {
        Subcommand::State => commands::state(cfg, &mut out),
        Subcommand::Evolve => commands::evolve(cfg, &mut out),
        Subcommand::Discriminate => commands::discriminate(cfg, &mut out),
        Subcommand::SignalTest => commands::signal_test(cfg, &mut out),
        Subcommand::KimShih => commands::kim_shih(cfg, &mut out),
        Subcommand::Persistence => commands::persistence(cfg, &mut out),
        Subcommand::Bell => commands::bell(cfg, &mut out),
        Subcommand::OracleCheck => commands::oracle_check(cfg, &mut out),
    }
}
