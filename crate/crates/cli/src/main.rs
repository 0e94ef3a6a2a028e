//! `queko`: generate layout-synthesis benchmarks with known optimal depth,
//! verify schedules against them, and route them with a baseline router.

mod batch;
mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use queko::generator::DEFAULT_RETRY_LIMIT;
use queko::reduction::{DEFAULT_DEPTH_LIMIT, DEFAULT_HC_LIMIT};
use queko::router::DEFAULT_MONOMORPHISM_NODES;
use queko::{GateDensity, Placement, RouterConfig};

use crate::batch::{BatchSpec, Preset};
use crate::io::{resolve_device, usage, CliError};

#[derive(Parser)]
#[command(name = "queko", version, about = "Benchmarks with known optimal depth for qubit layout synthesis")]
struct Cli {
    /// Base seed. `gen` uses seeds seed..seed+N; `route` seeds its placement search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for batch generation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmarks and their solution sidecars.
    Gen(GenArgs),
    /// Check a schedule against a benchmark.
    Verify {
        schedule: PathBuf,
        benchmark: PathBuf,
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long)]
        device: Option<String>,
        /// Read `cx a,b; cx b,a; cx a,b` runs on one edge as SWAPs.
        #[arg(long)]
        detect_cx_swaps: bool,
    },
    /// Route a benchmark with the baseline router.
    Route {
        benchmark: PathBuf,
        #[arg(long)]
        device: Option<String>,
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long, default_value = "monomorphism-try")]
        placement: Placement,
        #[arg(long, default_value_t = 4)]
        lookahead: usize,
        #[arg(long, default_value_t = DEFAULT_MONOMORPHISM_NODES)]
        max_nodes: usize,
        /// Schedule output (default: <out-dir>/<benchmark>.sched).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the gate density of a QASM circuit.
    Density {
        file: PathBuf,
        /// Also print exact fractions and counts.
        #[arg(long)]
        exact: bool,
    },
    /// Build the Hamiltonian-cycle reduction instance for a graph.
    ReduceHc {
        /// Edge-list file, built-in device, or family such as complete:5.
        #[arg(long)]
        graph: String,
        /// Run both brute-force oracles and compare.
        #[arg(long)]
        check: bool,
        /// Write the instance as QASM here instead of standard output.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_HC_LIMIT)]
        hc_limit: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
        depth_limit: usize,
    },
    /// List bundled devices, or print one as an edge list.
    Devices { name: Option<String> },
}

#[derive(Args)]
struct GenArgs {
    /// Device (repeatable): built-in name, grid:RxC, or edge-list file.
    #[arg(long)]
    device: Vec<String>,
    /// Depths (repeatable): N, N,M,... or start:end:step.
    #[arg(long)]
    depth: Vec<String>,
    /// Density (repeatable): tfl, qse, or d1,d2.
    #[arg(long)]
    density: Vec<String>,
    /// Benchmarks per (device, depth, density) point.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Default depths and densities of a named benchmark set.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, default_value_t = DEFAULT_RETRY_LIMIT)]
    retry_limit: usize,
    /// Report admissibility and counts without generating.
    #[arg(long)]
    check_only: bool,
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<(), CliError> {
    let mut devices = a.device.iter().map(|d| resolve_device(d)).collect::<Result<Vec<_>, _>>()?;
    let mut depths = batch::parse_depths(&a.depth)?;
    let mut densities = a
        .density
        .iter()
        .map(|d| GateDensity::parse(d).map_err(|e| usage(format!("density `{d}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(p) = a.preset {
        if devices.is_empty() && p == Preset::Igd {
            devices.push(resolve_device("tokyo")?);
        }
        if depths.is_empty() {
            depths = batch::preset_depths(p);
        }
        if densities.is_empty() {
            densities = batch::preset_densities(p);
        }
    }
    if devices.is_empty() || depths.is_empty() || densities.is_empty() {
        return Err(usage("gen needs --device, --depth and --density (or a --preset)"));
    }
    if a.seeds == 0 || a.retry_limit == 0 {
        return Err(usage("--seeds and --retry-limit must be positive"));
    }
    let spec = BatchSpec {
        devices,
        depths,
        densities,
        seeds: (0..a.seeds).map(|i| cli.seed.wrapping_add(i)).collect(),
        retry_limit: a.retry_limit,
    };
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    batch::run(&spec, &cli.out_dir, jobs.max(1), a.check_only)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(a) => gen(&cli, a),
        Command::Verify {
            schedule,
            benchmark,
            sidecar,
            device,
            detect_cx_swaps,
        } => commands::verify_cmd(schedule, benchmark, sidecar.as_deref(), device.as_deref(), *detect_cx_swaps),
        Command::Route {
            benchmark,
            device,
            sidecar,
            placement,
            lookahead,
            max_nodes,
            out,
        } => commands::route_cmd(commands::RouteArgs {
            benchmark,
            device: device.as_deref(),
            sidecar: sidecar.as_deref(),
            out: out.clone(),
            out_dir: &cli.out_dir,
            config: RouterConfig {
                placement: *placement,
                lookahead: *lookahead,
                seed: cli.seed,
                max_monomorphism_nodes: *max_nodes,
            },
        }),
        Command::Density { file, exact } => commands::density_cmd(file, *exact),
        Command::ReduceHc {
            graph,
            check,
            emit,
            hc_limit,
            depth_limit,
        } => commands::reduce_cmd(commands::ReduceArgs {
            graph,
            check: *check,
            emit: emit.as_deref(),
            hc_limit: *hc_limit,
            depth_limit: *depth_limit,
        }),
        Command::Devices { name } => commands::devices_cmd(name.as_deref()),
    }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
