use anyhow::Context;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::time::Instant;

use ckm_cli::commands;
use ckm_cli::config::Config;

#[derive(Parser)]
#[command(
    name = "ckm",
    about = "Feedback-controlled Kuramoto model: simulation, equilibrium census, bifurcations and continuum-limit comparisons"
)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true, default_value = "ckm.json")]
    config: PathBuf,

    /// Overrides model.seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for CSV/JSON data.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweeps and enumerations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate from random initial phases; emit trajectories and the
    /// final deviation profile.
    Simulate,
    /// Census of all 2^n equilibria with stability classification.
    Enumerate,
    /// Saddle-node and pitchfork points plus branch diagrams.
    Bifurcate,
    /// Steady-state deviation band over a gain grid.
    SweepGain,
    /// L2 distances between discrete synchronized states and the continuum
    /// profile over node counts and seeds.
    Compare,
    /// Weight matrix in coordinate-list form.
    GraphDump,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let mut cfg = Config::from_file(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.model.seed = seed;
    }
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;

    let start = Instant::now();
    let mut report = match cli.command {
        Command::Simulate => commands::simulate::run(&cfg, &cli.out)?,
        Command::Enumerate => commands::enumerate::run(&cfg, &cli.out)?,
        Command::Bifurcate => commands::bifurcate::run(&cfg, &cli.out)?,
        Command::SweepGain => commands::sweep::run(&cfg, &cli.out)?,
        Command::Compare => commands::compare::run(&cfg, &cli.out)?,
        Command::GraphDump => commands::graph_dump::run(&cfg, &cli.out)?,
    };
    report.elapsed_ms = start.elapsed().as_millis();
    let report_path = report.write(&cli.out)?;

    for note in &report.notes {
        eprintln!("note: {note}");
    }
    for failure in &report.failures {
        eprintln!("failure: {failure}");
    }
    println!(
        "{}: wrote {} file(s) to {} in {} ms",
        report.command,
        report.outputs.len() + 1,
        cli.out.display(),
        report.elapsed_ms
    );
    let _ = report_path;
    Ok(report.ok)
}
