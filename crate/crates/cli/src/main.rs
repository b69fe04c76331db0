use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ghznetsim_cli::{commands, distance, CliError, ExperimentSpec, Settings};

/// Monte Carlo simulator for GHZ-state distribution over noisy quantum
/// networks.
#[derive(Parser)]
#[command(name = "ghznetsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write results.csv, results_sets.csv, points.jsonl and summary.json.
    Run(Common),
    /// Rate/fidelity scatter, Pareto frontiers and matched comparisons.
    Pareto {
        #[command(flatten)]
        common: Common,
        /// Existing results.csv to analyse instead of running the sweep.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Best rate per grid size under a fidelity floor, corner users.
    Distance {
        #[command(flatten)]
        common: Common,
        /// Existing results.csv to select from instead of running the sweep.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the oracle self-check suites.
    Validate,
}

#[derive(Args)]
struct Common {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated protocols (sp-s, sp-t, mp-s, mp-t) or "all".
    #[arg(long)]
    protocol: Option<String>,
    /// Grid side(s), comma-separated.
    #[arg(long)]
    grid: Option<String>,
    /// JSON graph file used instead of a grid.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Link generation probability, comma-separated for a sweep.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Cutoffs: a list "1,2,5" or range "1-20".
    #[arg(long = "Qc", alias = "qc")]
    qc: Option<String>,
    /// "random:N", "corners" or a node list.
    #[arg(long)]
    users: Option<String>,
    #[arg(long)]
    user_sets: Option<usize>,
    /// Successes per user set.
    #[arg(long)]
    successes: Option<u64>,
    /// Timeslot budget per user set.
    #[arg(long)]
    max_timeslots: Option<u64>,
    /// Pooled points with fewer total successes are omitted.
    #[arg(long)]
    min_total_successes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Minimum mean fidelity for the distance experiment.
    #[arg(long)]
    fidelity_floor: Option<f64>,
    /// Also write every trial to trials.jsonl.
    #[arg(long)]
    trials: bool,
}

impl Common {
    fn resolve(self, defaults: ExperimentSpec) -> Result<ExperimentSpec, CliError> {
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            protocol: self.protocol,
            grid: self.grid,
            graph: self.graph,
            p: self.p,
            w0: self.w0,
            delta: self.delta,
            qc: self.qc,
            users: self.users,
            user_sets: self.user_sets,
            successes: self.successes,
            max_timeslots: self.max_timeslots,
            min_total_successes: self.min_total_successes,
            seed: self.seed,
            out: self.out,
            fidelity_floor: self.fidelity_floor,
            trials: self.trials.then_some(true),
        };
        file.merged(flags).resolve(defaults)
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GHZNETSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("GHZNETSIM_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Run(common) => commands::run(&common.resolve(ExperimentSpec::default())?).map(drop),
        Command::Pareto { common, input } => {
            commands::pareto(&common.resolve(ExperimentSpec::default())?, input.as_deref()).map(drop)
        }
        Command::Distance { common, input } => {
            commands::distance(&common.resolve(distance::default_spec())?, input.as_deref()).map(drop)
        }
        Command::Validate => commands::validate(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
