use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use gwflow_cli::{bench, default_threads, mesh_cmd, run, validate, with_pool};

#[derive(Parser)]
#[command(name = "gwflow", version, about = "Finite-volume Richards equation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Threads {
    /// Worker threads [default: hardware parallelism]
    #[arg(long, env = "GWFLOW_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case file to its end time
    Run {
        case: PathBuf,
        #[command(flatten)]
        threads: Threads,
        /// Output directory, overrides [output] dir
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override a case entry, e.g. --set time.end=2day
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Closure golden values and the column reference comparison
    Validate {
        #[command(flatten)]
        threads: Threads,
        /// Scale the retention-curve alpha (negative control)
        #[arg(long, default_value_t = 1.0)]
        alpha_scale: f64,
    },
    /// Strong-scaling timings over a fixed number of steps
    Bench {
        case: PathBuf,
        /// Thread counts to time
        #[arg(long, value_delimiter = ',', default_values_t = [1usize])]
        threads: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Re-emit a legacy VTK mesh with boundary patches
    ConvertVtk {
        input: PathBuf,
        output: PathBuf,
        /// Patch sidecar; without it every boundary face is in "boundary"
        #[arg(long)]
        patches: Option<PathBuf>,
    },
    /// Cell, face and patch counts of a case mesh or a VTK file
    MeshInfo {
        path: PathBuf,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
}

fn threads(t: &Threads) -> usize {
    t.threads.unwrap_or_else(default_threads)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { case, threads: t, output, set } => {
            let opts = run::RunOptions { output, overrides: set };
            let summary = with_pool(threads(&t), || run::run_case(&case, &opts))??;
            let s = &summary.stats;
            println!(
                "t = {} s after {} steps, {} Picard iterations, {} warning(s), mass balance error {:e}",
                summary.end_time,
                s.steps,
                s.picard_iterations,
                s.warnings,
                s.mass_balance_error()
            );
            println!("output in {}", summary.output_dir.display());
            if let Some(msg) = summary.aborted {
                eprintln!("aborted: {msg}");
                return Ok(false);
            }
            Ok(true)
        }
        Command::Validate { threads: t, alpha_scale } => {
            let report = with_pool(threads(&t), || validate::validate(alpha_scale))??;
            println!("{report}");
            Ok(report.passed())
        }
        Command::Bench { case, threads, steps, repeats, set } => {
            let cfg = run::load_case(&case, &set)?;
            let base = case.parent().map(PathBuf::from).unwrap_or_default();
            let report = bench::bench(&cfg, &base, &threads, steps, repeats)?;
            println!("{report}");
            Ok(true)
        }
        Command::ConvertVtk { input, output, patches } => {
            let c = mesh_cmd::convert_vtk(&input, patches.as_deref(), &output)?;
            println!("{}", c.summary);
            println!("wrote {} and {}", c.vtk.display(), c.patches.display());
            Ok(true)
        }
        Command::MeshInfo { path, set } => {
            println!("{}", mesh_cmd::mesh_info(&path, &set)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
