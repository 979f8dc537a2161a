//! Command-line front end for the experiment suites.
//!
//! Each subcommand runs one suite. Configs come from a JSON file whose
//! `kind` must match the subcommand; without a file the suite's defaults
//! run. Exit code 2 means the invocation was rejected before anything ran
//! (bad flags, unreadable or invalid config); 1 means the run itself failed.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use onsearch::exec::with_thread_limit;
use onsearch::harness::{
    emit_report, run_experiment, ExperimentConfig, ExperimentKind, ReportFormat,
};

#[derive(Parser)]
#[command(
    name = "onsearch",
    version,
    about = "Experiment suites for online search with learned predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case doubling over random curves (kind: double-bound).
    Simulate(RunArgs),
    /// Consistency/robustness frontier of the augmented algorithm
    /// (kind: pad-frontier).
    Frontier(RunArgs),
    /// Train-then-run sweep over sample sizes (kind: standard-sweep).
    Sweep(RunArgs),
    /// Agnostic-gap estimation on random fixtures (kind: agnostic-delta).
    EstimateDelta(RunArgs),
    /// Competitive vs. symmetric training losses (kind: loss-compare).
    CompareLosses(RunArgs),
    /// Optimal-policy lower bounds on small fixtures
    /// (kind: lowerbound-demo).
    Lowerbound(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Simulate(_) => ExperimentKind::DoubleBound,
            Command::Frontier(_) => ExperimentKind::PadFrontier,
            Command::Sweep(_) => ExperimentKind::StandardSweep,
            Command::EstimateDelta(_) => ExperimentKind::AgnosticDelta,
            Command::CompareLosses(_) => ExperimentKind::LossCompare,
            Command::Lowerbound(_) => ExperimentKind::LowerboundDemo,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a)
            | Command::Frontier(a)
            | Command::Sweep(a)
            | Command::EstimateDelta(a)
            | Command::CompareLosses(a)
            | Command::Lowerbound(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; suite defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Worker threads; 0 keeps the pool default.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let config = ExperimentConfig::from_path(path)
                .map_err(|e| anyhow::anyhow!("config {}: {e}", path.display()))?;
            anyhow::ensure!(
                config.kind() == kind,
                "config kind `{}` does not match this subcommand (expected `{}`)",
                config.kind().tag(),
                kind.tag()
            );
            config
        }
        None => ExperimentConfig::default_for(kind),
    };
    if let Some(seed) = args.seed {
        config.set_seed(seed);
    }
    config.validate()?;
    Ok(config)
}

fn execute(config: &ExperimentConfig, args: &RunArgs) -> anyhow::Result<()> {
    let threads = (args.threads > 0).then_some(args.threads);
    let rows = with_thread_limit(threads, || run_experiment(config))?;
    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::JsonLines,
    };
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
            let mut writer = std::io::BufWriter::new(file);
            emit_report(&rows, format, &mut writer)?;
            writer.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            emit_report(&rows, format, stdout.lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let args = cli.command.args();

    // Everything up to here only inspects the invocation; failures are
    // usage errors, not run failures.
    let config = match load_config(kind, args) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };

    match execute(&config, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
