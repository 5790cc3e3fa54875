mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "curvegeom", version, about = "Inner and outer metrics on spaces of closed curves")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; overrides `io.output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the experiment; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inner (Sobolev) distance between two curves.
    InnerDist { curve_a: Option<PathBuf>, curve_b: Option<PathBuf> },
    /// Outer (kernel) distance between two curves.
    OuterDist { curve_a: Option<PathBuf>, curve_b: Option<PathBuf> },
    /// Seeded comparison experiment; writes JSON and a CSV next to it.
    Compare,
    /// Transports a curve by the configured field sequence.
    Flow { curve: Option<PathBuf> },
    /// One-dimensional discontinuity example over a sweep of points.
    Demo1d {
        /// Evaluation points, comma separated; overrides `demo1d.sweep`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.out.is_some() {
        cfg.io.output = cli.out.clone();
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.unwrap_or(0)).build()?;
    pool.install(|| match cli.command {
        Command::InnerDist { curve_a, curve_b } => commands::distance(&cfg, commands::Metric::Inner, curve_a, curve_b),
        Command::OuterDist { curve_a, curve_b } => commands::distance(&cfg, commands::Metric::Outer, curve_a, curve_b),
        Command::Compare => commands::compare(&cfg),
        Command::Flow { curve } => commands::flow(&cfg, curve),
        Command::Demo1d { x } => commands::demo1d(&cfg, x),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::Unconverged(why)) => {
            eprintln!("warning: {why}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
