//! frackpp: front-propagation experiments for the Fisher-KPP equation with
//! alpha-stable diffusion.
//!
//! Subcommands: `run` a configured experiment, `verify` an existing output
//! directory, `plot` one or more runs, `tabulate-kernel` to export a density
//! table. Exit codes: 0 all checks pass, 2 an acceptance check failed,
//! 1 execution error.

// validation guards are written `!(x > 0)` so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod config;
mod pipeline;
mod plots;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frackpp", version, about = "fractional Fisher-KPP front laboratory")]
struct Cli {
    /// worker threads for the convolution inner loop (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and write its artifacts
    Run(RunArgs),
    /// Re-run the verification passes on an existing output directory
    Verify { out_dir: PathBuf },
    /// Emit gnuplot-ready data files and a script for one or more runs
    Plot {
        /// output directories of completed runs (two overlay)
        run_dirs: Vec<PathBuf>,
        /// where plot data goes (default: first run directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate p(1,r) for one alpha and export CSV plus JSON sidecar
    TabulateKernel(TabulateArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// validate the config and print derived constants without computing
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct TabulateArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1e6)]
    r_max: f64,
    #[arg(long, default_value_t = 4096)]
    nodes: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    match dispatch(cli.command) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Run(args) => run_command(args),
        Command::Verify { out_dir } => {
            let result = pipeline::verify_dir(&out_dir)?;
            print_summary(&result.manifest);
            Ok(result.overall_pass)
        }
        Command::Plot { run_dirs, out } => {
            anyhow::ensure!(!run_dirs.is_empty(), "plot needs at least one run directory");
            let target = out.unwrap_or_else(|| run_dirs[0].clone());
            let dirs: Vec<&std::path::Path> = run_dirs.iter().map(|p| p.as_path()).collect();
            let files = plots::emit_plots(&dirs, &target)?;
            for f in files {
                println!("wrote {}", target.join(f).display());
            }
            Ok(true)
        }
        Command::TabulateKernel(args) => tabulate_command(args),
    }
}

fn run_command(args: RunArgs) -> Result<bool> {
    let experiment = config::parse_config(&args.config)?;
    let constants = pipeline::derived_constants(&experiment);
    println!(
        "alpha = {}, c* = {:.6}, c** = {:.6}, c*1 = {:.6}",
        experiment.simulation.alpha, constants.c_star, constants.c_star_star, constants.c_star_one
    );
    if args.dry_run {
        println!(
            "dry run: {} steps on a grid reaching [{:.3e}, {:.3e}], fit window [{}, {}]",
            (experiment.simulation.t_final / experiment.simulation.dt).round(),
            -experiment.simulation.grid.left_width,
            experiment.simulation.grid.right_width,
            experiment.fit.window.0,
            experiment.fit.window.1
        );
        return Ok(true);
    }
    let result = pipeline::run_experiment(&experiment, &args.out)
        .with_context(|| format!("experiment {}", args.config.display()))?;
    print_summary(&result.manifest);
    Ok(result.overall_pass)
}

fn print_summary(manifest: &artifacts::ExperimentManifest) {
    for check in &manifest.checks {
        println!(
            "check {:<18} {}  {}",
            check.name,
            if check.pass { "PASS" } else { "FAIL" },
            check.detail
        );
    }
    println!(
        "overall: {}",
        if manifest.overall_pass { "PASS" } else { "FAIL" }
    );
}

fn tabulate_command(args: TabulateArgs) -> Result<bool> {
    use frackpp_core::StableKernel;
    std::fs::create_dir_all(&args.out)?;
    let kernel = StableKernel::tabulated(args.alpha, 1, args.r_max, args.nodes)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let csv = args.out.join("kernel_table.csv");
    let sidecar = args.out.join("kernel_table.json");
    kernel.export_table_csv(&csv).map_err(|e| anyhow::anyhow!("{e}"))?;
    kernel
        .export_table_sidecar(&sidecar)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    println!(
        "wrote {} and {} ({} nodes, tail coefficient {:.6e})",
        csv.display(),
        sidecar.display(),
        kernel.table_node_count().unwrap_or(0),
        kernel.tail_coefficient().unwrap_or(f64::NAN)
    );
    Ok(true)
}
