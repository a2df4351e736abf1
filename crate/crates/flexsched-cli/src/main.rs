use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use flexsched_cli::config::{self, ConfigOverrides};
use flexsched_cli::{commands, CliError};

/// Interval schedules for precedence-constrained projects: distribute
/// flexibility, simulate delays, report robustness.
#[derive(Parser)]
#[command(name = "flexsched", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural metrics per instance (instances.csv)
    Metrics(Shared),
    /// Schedules and distribution metrics per strategy (schedules.csv,
    /// flexmetrics.csv)
    Distribute(Shared),
    /// Monte-Carlo delay campaigns (simresults.csv)
    Simulate(Shared),
    /// Performance and correlation tables from earlier outputs (report.csv,
    /// correlations.csv)
    Report(Shared),
    /// Generate random instances in native format
    Gen(GenArgs),
}

#[derive(Args)]
struct Shared {
    /// Directory of instance files
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Instance file format: psplib (.sm) or native (.txt)
    #[arg(long)]
    format: Option<String>,
    /// Comma-separated strategy names
    #[arg(long)]
    strategies: Option<String>,
    /// Delay settings as "p:q,p:q,..." fractions
    #[arg(long)]
    grid: Option<String>,
    /// Simulation runs per setting
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed for all randomness
    #[arg(long)]
    seed: Option<u64>,
    /// Deadline as a multiple of the makespan
    #[arg(long = "deadline-factor")]
    deadline_factor: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Tasks per instance
    #[arg(long = "n-tasks")]
    n_tasks: usize,
    /// Target cyclomatic complexity (fixes the edge count exactly)
    #[arg(long)]
    complexity: usize,
    /// Number of instances
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Master seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Shared {
    fn resolve(self) -> Result<config::ExperimentConfig, CliError> {
        let overrides = ConfigOverrides {
            instances: self.instances,
            format: self.format,
            strategies: self.strategies,
            grid: self.grid,
            runs: self.runs,
            seed: self.seed,
            deadline_factor: self.deadline_factor,
            out: self.out,
        };
        config::resolve(self.config.as_deref(), overrides)
    }
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return Ok(());
            }
            return Err(CliError::Usage(err.to_string()));
        }
    };
    match cli.command {
        Command::Metrics(shared) => commands::cmd_metrics(&shared.resolve()?),
        Command::Distribute(shared) => commands::cmd_distribute(&shared.resolve()?),
        Command::Simulate(shared) => commands::cmd_simulate(&shared.resolve()?),
        Command::Report(shared) => commands::cmd_report(&shared.resolve()?),
        Command::Gen(args) => {
            commands::cmd_gen(args.n_tasks, args.complexity, args.count, args.seed, &args.out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
