use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod output;
mod svg;

/// Batch runner for the cyclic Toda experiments.
///
/// Every subcommand reads one JSON config and writes its results under
/// `--out`. Exit status: 0 when every check passes, 1 when a check fails or
/// a run errors, 2 for usage and config errors.
#[derive(Debug, Parser)]
#[command(name = "toda-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON config; relative paths inside it resolve against its directory.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config (lemma-pq only).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Baseline entropy scans over r and β.
    Spectrum(Common),
    /// Dirichlet solve, written as a solution directory.
    Solve(Common),
    /// Inequality and entropy-bound checks on a stored solution.
    Verify(Common),
    /// Entropy fields of a stored solution.
    Entropy(Common),
    /// Seeded fuzz of the ratio-domination entropy comparison.
    LemmaPq(Common),
}

/// Config problems, reported with exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

/// Parsed config together with the directory it was read from.
pub struct Loaded<T> {
    pub config: T,
    pub base: PathBuf,
}

impl<T> Loaded<T> {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<Loaded<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let config = serde_json::from_str(&text)
        .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    Ok(Loaded { config, base })
}

fn warn_unused_seed(c: &Common) {
    if c.seed.is_some() {
        eprintln!("warning: --seed has no effect on this subcommand");
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Spectrum(c) => {
            warn_unused_seed(&c);
            commands::spectrum::run(&c.config, &c.out)
        }
        Command::Solve(c) => {
            warn_unused_seed(&c);
            commands::solve::run(&c.config, &c.out)
        }
        Command::Verify(c) => {
            warn_unused_seed(&c);
            commands::verify::run(&c.config, &c.out)
        }
        Command::Entropy(c) => {
            warn_unused_seed(&c);
            commands::entropy::run(&c.config, &c.out)
        }
        Command::LemmaPq(c) => commands::lemma_pq::run(&c.config, &c.out, c.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
