use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qvolume::harness::{emit_plot_data, run, Experiment, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "qvolume", version, about = "Run circuit-volume, teleportation, shadow and design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration; defaults are used for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, overriding the configuration.
    #[arg(long)]
    workers: Option<usize>,
    /// Append the result record to this NDJSON file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the named series as a tab-separated table.
    #[arg(long = "emit-plot")]
    emit_plot: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    TeleportVerify(RunArgs),
    SpacetimeRandom(RunArgs),
    SpacetimeClifford(RunArgs),
    ShadowRun(RunArgs),
    DesignCheck(RunArgs),
    Accdim(RunArgs),
    BoundsTable(RunArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::TeleportVerify(a) => (ExperimentKind::TeleportVerify, a),
            Command::SpacetimeRandom(a) => (ExperimentKind::SpacetimeRandom, a),
            Command::SpacetimeClifford(a) => (ExperimentKind::SpacetimeClifford, a),
            Command::ShadowRun(a) => (ExperimentKind::ShadowRun, a),
            Command::DesignCheck(a) => (ExperimentKind::DesignCheck, a),
            Command::Accdim(a) => (ExperimentKind::Accdim, a),
            Command::BoundsTable(a) => (ExperimentKind::BoundsTable, a),
        }
    }
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<bool, String> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => ExperimentConfig::new(Experiment::default_for(kind), 0),
    };
    if config.kind() != kind {
        return Err(format!("configuration is for `{}`, not `{kind}`", config.kind()));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(series) = &args.emit_plot {
        qvolume::harness::series_columns(series).map_err(|e| e.to_string())?;
    }
    let record = run(&config).map_err(|e| e.to_string())?;
    let line = record.to_line().map_err(|e| e.to_string())?;
    if let Some(path) = &args.out {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        writeln!(f, "{line}").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    match &args.emit_plot {
        Some(series) => print!("{}", emit_plot_data(&record, series).map_err(|e| e.to_string())?),
        None => println!("{line}"),
    }
    for check in record.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} = {} (tolerance {})", check.name, check.value, check.tolerance);
    }
    Ok(record.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, args) = cli.command.split();
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
