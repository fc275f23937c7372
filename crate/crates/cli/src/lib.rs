//! `copjoint` command-line front end: simulate, fit, evaluate and compare
//! copula joint-choice models from a TOML manifest.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::{exit, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "copjoint", version, about = "Copula joint discrete-choice models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one copula family (or all) and rank the fits by AIC.
    Fit(CommonArgs),
    /// Draw a synthetic dataset from a known truth.
    Simulate(CommonArgs),
    /// Recompute LL, AIC and MPE of stored parameters.
    Eval(CommonArgs),
    /// Rank stored fit reports.
    Compare(CommonArgs),
    /// Natural-breaks thresholds for a numeric column.
    Breaks(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Fit(a) | Command::Simulate(a) | Command::Eval(a) | Command::Compare(a) | Command::Breaks(a) => a,
        }
    }
}

/// Runs a parsed command line and returns the text to print.
pub fn run(cli: &Cli) -> Result<String> {
    let args = cli.command.args();
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.override_with(args.seed, args.deterministic, args.out.clone());
    match cli.command {
        Command::Fit(_) => commands::fit(&cfg),
        Command::Simulate(_) => commands::simulate_cmd(&cfg),
        Command::Eval(_) => commands::eval(&cfg),
        Command::Compare(_) => commands::compare_cmd(&cfg),
        Command::Breaks(_) => commands::breaks(&cfg),
    }
}
