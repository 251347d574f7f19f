mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;

/// Randomized "tetris" simulation of Hamiltonian dynamics.
#[derive(Parser)]
#[command(name = "tetris", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tetris estimator time series.
    Evolve(Common),
    /// Exact reference series.
    Exact(Common),
    /// First-order Trotter series.
    Trotter(Common),
    /// Final energy per site against ramp time.
    Adiabatic(Common),
    /// Loschmidt echo and its imaginary/real ratio.
    Loschmidt(Common),
    /// Angles, attenuation and shot counts as JSON.
    Analyze(Common),
    /// Dump one sampled tetris.
    Sample(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Output path (`-` for stdout); defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Evolve(a) => ("evolve", a),
        Command::Exact(a) => ("exact", a),
        Command::Trotter(a) => ("trotter", a),
        Command::Adiabatic(a) => ("adiabatic", a),
        Command::Loschmidt(a) => ("loschmidt", a),
        Command::Analyze(a) => ("analyze", a),
        Command::Sample(a) => ("sample", a),
    };

    let mut cfg = ExperimentConfig::read(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let base_dir = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let out = match &args.out {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) => Some(p.clone()),
        None => cfg.output.as_ref().map(|p| base_dir.join(p)),
    };
    let experiment = cfg.resolve(&base_dir)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            anyhow::bail!("--threads must be positive");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building thread pool")?;

    let header = output::provenance(name, &experiment)?;
    let text = pool.install(|| -> Result<String> {
        Ok(match name {
            "evolve" => header + &commands::evolve(&experiment)?,
            "exact" => header + &commands::exact(&experiment)?,
            "trotter" => header + &commands::trotter(&experiment)?,
            "adiabatic" => header + &commands::adiabatic(&experiment)?,
            "loschmidt" => header + &commands::loschmidt(&experiment)?,
            "analyze" => commands::analyze(&experiment, &header)?,
            "sample" => header + &commands::sample(&experiment)?,
            _ => unreachable!(),
        })
    })?;
    output::write_atomic(out.as_deref(), &text)
}
