mod commands;
mod config;
mod error;
mod overlay;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "dynaray", version, about = "Dynamic tomography: simulate, reconstruct and analyze")]
struct Cli {
    /// Worker threads (default: DYNARAY_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; omitted keys take their defaults.
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set sinogram.n_phi=120`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Shorthand for `--set output_dir=DIR`.
    #[arg(long, short)]
    output_dir: Option<PathBuf>,

    /// Continue when the motion-model or Bolker checks fail.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize the phantom and compute its dynamic sinogram.
    Simulate(RunArgs),
    /// Filtered backprojection of a sinogram.
    Reconstruct {
        #[command(flatten)]
        run: RunArgs,
        /// Input sinogram (default: OUTPUT_DIR/sinogram.rawf64).
        #[arg(long)]
        sinogram: Option<PathBuf>,
    },
    /// Bolker, visibility, artifact-curve, uniqueness and edge-energy reports.
    Analyze {
        #[command(flatten)]
        run: RunArgs,
        /// Reconstruction scored by the edge-energy report
        /// (default: recomputed from the phantom).
        #[arg(long)]
        recon: Option<PathBuf>,
    },
    /// Draw artifact curves over a reconstruction.
    Overlay {
        #[arg(long)]
        recon: PathBuf,
        #[arg(long)]
        curves: PathBuf,
        #[arg(long, short, default_value = "overlay.pgm")]
        output: PathBuf,
        /// Only curves traced at this end of the data interval.
        #[arg(long, allow_hyphen_values = true)]
        phi_end: Option<f64>,
    },
    /// simulate, reconstruct, analyze and overlay in one run.
    Report(RunArgs),
    /// Print the resolved configuration.
    Config(RunArgs),
}

fn thread_count(flag: Option<usize>) -> CliResult<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("DYNARAY_THREADS") {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("DYNARAY_THREADS must be a positive integer, got `{v}`")))?,
            _ => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(CliError::Config("thread count must be positive".into()));
    }
    Ok(n)
}

fn context(args: RunArgs, threads: usize) -> CliResult<Context> {
    let mut sets = args.sets;
    if let Some(dir) = args.output_dir {
        let json = serde_json::to_string(&dir).map_err(|e| CliError::Config(e.to_string()))?;
        sets.push(format!("output_dir={json}"));
    }
    Ok(Context {
        config: RunConfig::resolve(args.config.as_deref(), &sets)?,
        force: args.force,
        threads,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let threads = thread_count(cli.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;

    match cli.command {
        Command::Simulate(args) => commands::simulate(&context(args, threads)?).map(drop),
        Command::Reconstruct { run, sinogram } => {
            commands::reconstruct_cmd(&context(run, threads)?, sinogram.as_deref()).map(drop)
        }
        Command::Analyze { run, recon } => commands::analyze(&context(run, threads)?, None, recon.as_deref()),
        Command::Overlay {
            recon,
            curves,
            output,
            phi_end,
        } => commands::overlay(&recon, &curves, &output, phi_end),
        Command::Report(args) => commands::report(&context(args, threads)?),
        Command::Config(args) => {
            let ctx = context(args, threads)?;
            let json = serde_json::to_string_pretty(&ctx.config).expect("config serializes");
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dynaray: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
