use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use raman_comb::commands;
use raman_comb::error::{CliError, Result};
use raman_comb::io::OutputDir;
use raman_comb::manifest::RunManifest;
use raman_comb::oracle;
use serde::Serialize;

/// Vacuum-seeded stimulated Raman comb simulator.
///
/// Exit status: 0 success, 1 failed oracle check, 2 configuration error,
/// 3 numerical validity guard (step size, pump depletion, non-finite
/// values), 4 IO or file-format error.
#[derive(Parser)]
#[command(version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo ensemble and store it.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Propagate mean intensities and the S/AS correlation (two-mode media).
    Moments {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Fit fringes and compute statistics for a stored ensemble.
    Analyze {
        /// Ensemble file written by `simulate`.
        #[arg(short, long)]
        ensemble: PathBuf,
        /// Take detector and analysis settings from this configuration
        /// instead of the one stored in the ensemble.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Simulate and analyze: visibility, phase and Φ_nm histograms.
    #[command(name = "reproduce-fig2")]
    ReproduceFig2 {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Mean pump, Stokes and anti-Stokes intensities with C(τ), as CSV and SVG.
    #[command(name = "reproduce-fig3b")]
    ReproduceFig3b {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the built-in checks against independent references.
    #[command(name = "oracle-check")]
    OracleCheck {
        /// Smaller grids and samples; reports the measured convergence order.
        #[arg(long)]
        coarse: bool,
        /// Also write the report (and a manifest) to this directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn print<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("summaries always serialize")
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, threads } => print(&commands::simulate(&config, &out, threads)?),
        Command::Moments { config, out } => print(&commands::moments(&config, &out)?),
        Command::Analyze {
            ensemble,
            config,
            out,
            threads,
        } => print(&commands::analyze(&ensemble, config.as_deref(), &out, threads)?),
        Command::ReproduceFig2 { config, out, threads } => print(&commands::reproduce_fig2(&config, &out, threads)?),
        Command::ReproduceFig3b { config, out } => print(&commands::reproduce_fig3b(&config, &out)?),
        Command::OracleCheck { coarse, out } => {
            let start = Instant::now();
            let report = oracle::run_checks(coarse);
            print(&report);
            if let Some(dir) = out {
                let mut out = OutputDir::create(&dir)?;
                out.write_json("oracle.json", &report)?;
                RunManifest::new("oracle-check", None, None).finish(&mut out, start.elapsed().as_secs_f64())?;
            }
            let failed = report.failed();
            if failed > 0 {
                return Err(CliError::OracleFailed { failed });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
