use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sfs_experiment::commands::{
    cmd_evaluate, cmd_place, cmd_priors, cmd_reproduce_paper, cmd_selftest, selftest_passed,
};
use sfs_experiment::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "sfsplace", version, about = "Loudspeaker placement for sound field synthesis")]
struct Cli {
    /// JSON configuration; omitted keys take the reference-study defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random choice (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Greedy placement plus baselines; writes placements and cost traces.
    Place,
    /// SDR table and field grids.
    Evaluate {
        /// Placement CSV (rank,index,x,y); a fresh greedy placement if absent.
        #[arg(long)]
        placement: Option<PathBuf>,
    },
    /// Full reference study: narrowband and broadband placements, both
    /// baselines, angle and frequency sweeps.
    ReproducePaper,
    /// Dump prior mean and covariance per placement frequency.
    Priors,
    /// Run the built-in oracle checks.
    Selftest,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let Format::Csv = cli.format;
    let mut cfg = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let out = cfg.output_dir.clone();

    match cli.command {
        Command::Place => {
            for p in cmd_place(&cfg, &out)? {
                let last = p.cost_trace.last().map(|j| format!(", J = {j:.6e}")).unwrap_or_default();
                println!("{}: {:?}{last}", p.label, p.indices);
            }
        }
        Command::Evaluate { placement } => {
            let rows = cmd_evaluate(&cfg, &out, placement.as_deref())?;
            println!("wrote {} SDR rows to {}", rows.len(), out.join("sdr.csv").display());
        }
        Command::ReproducePaper => {
            let s = cmd_reproduce_paper(&cfg, &out)?;
            println!("mean SDR at {} Hz:", s.narrowband_hz);
            for (k, v) in &s.mean_sdr_db {
                match s.sdr_at_zero_db.get(k) {
                    Some(z) => println!("  {k:<12} {v:7.2} dB   (0 deg: {z:7.2} dB)"),
                    None => println!("  {k:<12} {v:7.2} dB"),
                }
            }
            println!("artifacts in {}", out.display());
        }
        Command::Priors => {
            for p in cmd_priors(&cfg, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Selftest => {
            let checks = cmd_selftest(cfg.seed)?;
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            selftest_passed(&checks)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
