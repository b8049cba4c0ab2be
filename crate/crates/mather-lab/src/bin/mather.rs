//! The `mather` binary: Aubry–Mather experiments on conformally flat
//! 2-torus metrics, driven by a TOML config.
//!
//! Subcommands (all take the same flags):
//! - `alpha`    — critical values only; fastest, for large grids.
//! - `measures` — full pipeline; detail JSON additionally carries the
//!   occupation measures (atom-level) of every stored minimizer.
//! - `aubry`    — full pipeline; additionally writes `aubry_nodes.txt`.
//! - `sweep`    — full pipeline over all configured metrics × classes.
//! - `perturb`  — full pipeline over seeded perturbation trials of the
//!   first configured metric (requires the `[experiment]` block).
//!
//! Artifacts land in the output directory: `results.csv` (pinned schema),
//! `details.json` (full-pipeline runs), `aubry_nodes.txt` (aubry runs),
//! and `manifest.json`. Exit codes: 0 success, 2 config error,
//! 3 computation error, 4 I/O error; failures also print a single-line
//! JSON error record to stderr.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use mather_lab::config::{parse_config_with_overrides, Overrides, RunConfig};
use mather_lab::error::{LabError, LabResult};
use mather_lab::manifest::{RunManifest, StageTimings};
use mather_lab::report;
use mather_lab::runner::{
    self, build_geometry, build_instances, build_trial_instances, Depth, Instance,
};

#[derive(Parser)]
#[command(
    name = "mather",
    version,
    about = "Aubry–Mather experiments for conformally flat metrics on the 2-torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute critical values α(c) for every (metric, class) cell.
    Alpha(RunArgs),
    /// Full pipeline plus atom-level occupation measures in the detail JSON.
    Measures(RunArgs),
    /// Full pipeline plus the Aubry node-list file.
    Aubry(RunArgs),
    /// Full pipeline over all configured metrics and classes.
    Sweep(RunArgs),
    /// Full pipeline over seeded perturbation trials of the first metric.
    Perturb(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 or omitted = one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Master seed (overrides `[experiment] seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Grid side length (overrides `[grid] n`).
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Stencil radius (overrides `[stencil] radius`).
    #[arg(long)]
    radius: Option<i32>,
}

/// What distinguishes the subcommands once flags are parsed.
struct Mode {
    name: &'static str,
    depth: Depth,
    with_measures: bool,
    aubry_file: bool,
    trials: bool,
}

fn mode_of(command: &Command) -> (&RunArgs, Mode) {
    match command {
        Command::Alpha(a) => (
            a,
            Mode {
                name: "alpha",
                depth: Depth::AlphaOnly,
                with_measures: false,
                aubry_file: false,
                trials: false,
            },
        ),
        Command::Measures(a) => (
            a,
            Mode {
                name: "measures",
                depth: Depth::Full,
                with_measures: true,
                aubry_file: false,
                trials: false,
            },
        ),
        Command::Aubry(a) => (
            a,
            Mode {
                name: "aubry",
                depth: Depth::Full,
                with_measures: false,
                aubry_file: true,
                trials: false,
            },
        ),
        Command::Sweep(a) => (
            a,
            Mode {
                name: "sweep",
                depth: Depth::Full,
                with_measures: false,
                aubry_file: false,
                trials: false,
            },
        ),
        Command::Perturb(a) => (
            a,
            Mode {
                name: "perturb",
                depth: Depth::Full,
                with_measures: false,
                aubry_file: false,
                trials: true,
            },
        ),
    }
}

fn load_config(args: &RunArgs) -> LabResult<RunConfig> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| LabError::io(args.config.display().to_string(), e))?;
    let overrides = Overrides {
        out: args.out.clone(),
        seed: args.seed,
        grid_n: args.grid_n,
        radius: args.radius,
    };
    parse_config_with_overrides(&text, &overrides)
}

fn execute(args: &RunArgs, mode: &Mode) -> LabResult<()> {
    let t0 = Instant::now();
    let cfg = load_config(args)?;
    let config_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let (grid, stencil) = build_geometry(&cfg)?;
    let instances: Vec<Instance> = if mode.trials {
        build_trial_instances(&cfg, grid)?
    } else {
        build_instances(&cfg, grid)?
    };
    let build_ms = t1.elapsed().as_secs_f64() * 1e3;

    let t2 = Instant::now();
    let rows = runner::run_table(
        &cfg,
        &instances,
        &stencil,
        mode.depth,
        mode.with_measures,
        args.threads,
    )?;
    let compute_ms = t2.elapsed().as_secs_f64() * 1e3;

    let t3 = Instant::now();
    let out_dir = cfg.output.dir.clone();
    let hash = cfg.hash();
    let seed = cfg.master_seed();
    let mut files = Vec::new();

    let csv = report::csv_string(&rows, &cfg.tolerances, &hash, seed)?;
    report::write_text(&out_dir.join("results.csv"), &csv)?;
    files.push("results.csv".to_string());

    if mode.depth == Depth::Full {
        let details = report::details_string(&rows, &hash, seed)?;
        report::write_text(&out_dir.join("details.json"), &details)?;
        files.push("details.json".to_string());
    }
    if mode.aubry_file {
        let nodes = report::aubry_nodes_string(&rows);
        report::write_text(&out_dir.join("aubry_nodes.txt"), &nodes)?;
        files.push("aubry_nodes.txt".to_string());
    }

    let threads = args.threads.filter(|&t| t > 0).unwrap_or_else(num_threads);
    let mut timings = StageTimings {
        config_ms,
        build_ms,
        compute_ms,
        write_ms: 0.0,
    };
    timings.write_ms = t3.elapsed().as_secs_f64() * 1e3;
    files.push("manifest.json".to_string());
    let manifest = RunManifest::new(mode.name, &cfg, &rows, files, threads, timings);
    report::write_text(&out_dir.join("manifest.json"), &manifest.to_json()?)?;

    let ok = rows.iter().filter(|r| !r.flag.starts_with("error:")).count();
    println!(
        "{}: wrote {} rows ({} completed) to {}",
        mode.name,
        rows.len(),
        ok,
        out_dir.display()
    );
    Ok(())
}

fn num_threads() -> usize {
    std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
}

fn main() {
    let cli = Cli::parse();
    let (args, mode) = mode_of(&cli.command);
    if let Err(err) = execute(args, &mode) {
        let record = serde_json::to_string(&err.record())
            .unwrap_or_else(|_| format!("{{\"error\":\"internal\",\"message\":\"{err}\"}}"));
        eprintln!("{record}");
        std::process::exit(err.exit_code());
    }
}
