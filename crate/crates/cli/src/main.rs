use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xeit_cli::{execute, CliError};
use xeit_core::config::Mode;

/// Simulator for nuclear x-ray cavity EIT: reflectivity spectra, slow-light
/// propagation, and polariton pulse storage under hyperfine-field schedules.
#[derive(Parser)]
#[command(name = "xeit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state reflectivity scan versus x-ray detuning.
    Spectrum(RunArgs),
    /// Constant-field slow-light run with the two-solver cross-check.
    Propagate(RunArgs),
    /// Storage/retrieval experiment under a field schedule.
    Store(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; repeat the flag to run a sweep of configs.
    #[arg(long, required = true, num_args = 1..)]
    config: Vec<PathBuf>,
    /// Output directory (for sweeps: parent directory of per-config dirs).
    /// Defaults to `<config stem>_out`, or `.` for sweeps.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render static SVG plots next to the CSV/JSON outputs.
    #[arg(long)]
    plot: bool,
    /// Run this many sweep entries in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn out_dir_for(args: &RunArgs, config: &Path) -> PathBuf {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    if args.config.len() == 1 {
        args.out.clone().unwrap_or_else(|| PathBuf::from(format!("{stem}_out")))
    } else {
        args.out.clone().unwrap_or_else(|| PathBuf::from(".")).join(stem)
    }
}

fn run(mode: Mode, args: &RunArgs) -> Result<(), u8> {
    let entries: Vec<(PathBuf, PathBuf)> =
        args.config.iter().map(|c| (c.clone(), out_dir_for(args, c))).collect();
    let jobs = args.jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.min(entries.len().max(1)))
        .build()
        .expect("thread pool");
    let results: Vec<Result<(), CliError>> = pool.install(|| {
        use rayon::prelude::*;
        entries
            .par_iter()
            .map(|(config, out)| execute(mode, config, out, args.plot))
            .collect()
    });
    let mut code = None;
    for ((config, _), result) in entries.iter().zip(results) {
        if let Err(e) = result {
            eprintln!("xeit: {}: {e}", config.display());
            code.get_or_insert(e.exit_code());
        }
    }
    match code {
        None => Ok(()),
        Some(c) => Err(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Spectrum(args) => (Mode::Spectrum, args),
        Command::Propagate(args) => (Mode::Propagate, args),
        Command::Store(args) => (Mode::Store, args),
    };
    match run(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
