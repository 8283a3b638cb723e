use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tpdyn::deterministic::{DEFAULT_GRID_SIZE, DEFAULT_ROOT_TOL};
use tpdyn_cli::output::emit;
use tpdyn_cli::{commands, sweep, validate, CliResult, CommandOutput, Destinations, ScenarioConfig};

#[derive(Parser)]
#[command(name = "tpdyn", version, about = "Tolerance Principle learners and the language-change dynamics they induce")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Outputs {
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write an SVG line chart.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write a JSON copy of the summary.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl Outputs {
    fn destinations(self) -> Destinations {
        Destinations { csv: self.csv, svg: self.svg, json: self.json }
    }
}

#[derive(Subcommand)]
enum Command {
    /// N / ln N against the largest exception count the cost criterion accepts.
    Threshold {
        #[arg(long, conflicts_with_all = ["from", "to"])]
        n: Option<u64>,
        #[arg(long, requires = "to")]
        from: Option<u64>,
        #[arg(long, requires = "from")]
        to: Option<u64>,
        #[command(flatten)]
        out: Outputs,
    },
    /// Productivity verdict for N items with e exceptions.
    Decide {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        e: u64,
        #[command(flatten)]
        out: Outputs,
    },
    /// Expected search costs with and without the rule.
    Cost {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        e: u64,
        #[command(flatten)]
        out: Outputs,
    },
    /// Run the configured model and write its trajectory.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        out: Outputs,
    },
    /// Fixed points of the update map with their stability.
    FixedPoints {
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_ROOT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Outputs,
    },
    /// Transition matrix and limiting distribution of the finite-population chain.
    Markov {
        config: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_iters: usize,
        /// Write the full matrix as from,to,probability rows.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        out: Outputs,
    },
    /// Multi-generation run compared against the single-generation map.
    Multigen {
        config: PathBuf,
        /// Distance from the fixed point that counts as settled.
        #[arg(long, default_value_t = 1e-6)]
        settle_tol: f64,
        #[command(flatten)]
        out: Outputs,
    },
    /// Evaluate a one- or two-axis parameter grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: Outputs,
    },
    /// Compare the analytic maps with simulated learners.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        out: Outputs,
    },
}

fn with_config(
    path: &Path,
    out: Outputs,
    f: impl FnOnce(&ScenarioConfig) -> CliResult<CommandOutput>,
) -> CliResult<(CommandOutput, Destinations)> {
    let cfg = ScenarioConfig::load(path)?;
    let dest = out.destinations().or_config(&cfg.output());
    Ok((f(&cfg)?, dest))
}

fn run(cli: Cli) -> CliResult<()> {
    let (result, dest) = match cli.command {
        Command::Threshold { n, from, to, out } => (commands::threshold(n, from.zip(to))?, out.destinations()),
        Command::Decide { n, e, out } => (commands::decide(n, e)?, out.destinations()),
        Command::Cost { n, e, out } => (commands::cost(n, e)?, out.destinations()),
        Command::Simulate { config, out } => with_config(&config, out, commands::simulate)?,
        Command::FixedPoints { config, grid, tol, out } => {
            with_config(&config, out, |c| commands::fixed_points_report(c, grid, tol))?
        }
        Command::Markov { config, tol, max_iters, matrix, out } => {
            with_config(&config, out, |c| commands::markov(c, tol, max_iters, matrix.as_deref()))?
        }
        Command::Multigen { config, settle_tol, out } => {
            with_config(&config, out, |c| commands::multigen(c, settle_tol))?
        }
        Command::Sweep { config, workers, out } => with_config(&config, out, |c| sweep::sweep(c, workers))?,
        Command::Validate { config, out } => with_config(&config, out, validate::validate)?,
    };
    emit(&result, &dest, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())?;
    match result.failure {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("tpdyn: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
