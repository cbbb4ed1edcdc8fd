//! Command-line shell: argument parsing, logging setup, exit-code
//! mapping. All real work happens in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kpg_lab::{cmd_plot, cmd_run, cmd_verify, LabError, PlotKind};

/// Half-open seed range `a..b`.
#[derive(Debug, Clone, Copy)]
struct SeedRange {
    lo: u64,
    hi: u64,
}

fn parse_seed_range(text: &str) -> Result<SeedRange, String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("expected `a..b`, got `{text}`"))?;
    let lo = lo.trim().parse().map_err(|_| format!("bad range start `{lo}`"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad range end `{hi}`"))?;
    Ok(SeedRange { lo, hi })
}

#[derive(Parser)]
#[command(
    name = "kpg-lab",
    about = "Run, verify, and plot k-level policy-gradient experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment and write its trace CSV and config echo.
    Run {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output base path (default: config path minus extension).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long, conflicts_with = "seeds")]
        seed: Option<u64>,
        /// Sweep a half-open seed range `a..b`, one run per seed.
        #[arg(long, value_parser = parse_seed_range)]
        seeds: Option<SeedRange>,
    },
    /// Run a convergence-certificate suite against the configured game.
    Verify {
        /// Which certificate to check.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        theorem: u8,
        /// Experiment config (JSON) naming the game and learning rates.
        #[arg(long)]
        config: PathBuf,
        /// Output base path for the detail CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a trace CSV as an SVG chart.
    Plot {
        /// Trace CSV produced by `run` or `verify`.
        trace: PathBuf,
        /// Chart kind.
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Output SVG path (default: trace stem + kind).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<ExitCode, LabError> {
    match cli.command {
        Command::Run { config, out, seed, seeds } => {
            cmd_run(&config, out.as_deref(), seed, seeds.map(|r| (r.lo, r.hi)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { theorem, config, out } => {
            let artifacts = cmd_verify(theorem, &config, out.as_deref())?;
            if artifacts.report.passed || artifacts.report.skipped {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Plot { trace, kind, out } => {
            cmd_plot(&trace, kind, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("KPG_LAB_LOG", "warn"),
    )
    .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
