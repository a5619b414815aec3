use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpv_cli::{emit_report, exit_status, run_experiment, CliError, Experiment, ExperimentConfig, Format, Scenario};

#[derive(Parser)]
#[command(name = "qpv", version = qpv_cli::VERSION, about = "Position-based quantum cryptography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario JSON; built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Overrides the scenario's trial count.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, env = "QPV_SEED", default_value_t = 0)]
    seed: u64,
    /// Report path, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    workers: Option<usize>,
    /// Add wall-clock seconds to every row.
    #[arg(long)]
    timing: bool,
}

fn run(args: RunArgs) -> Result<i32, CliError> {
    let scenario = match &args.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    let cfg = ExperimentConfig {
        scenario,
        experiment: args.experiment,
        trials: args.trials,
        seed: args.seed,
        timing: args.timing,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(CliError::config("workers", "must be at least 1"));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| CliError::config("workers", e))?;
    let rows = pool.install(|| run_experiment(&cfg))?;
    emit_report(&rows, args.format, &args.out)?;
    for r in rows.iter().filter(|r| r.failed()) {
        eprintln!("check failed: {} {} {}", r.experiment, r.metric, r.params);
    }
    Ok(exit_status(&rows))
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qpv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
