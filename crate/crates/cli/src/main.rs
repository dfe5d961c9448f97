//! `torus-lab`: runs the verification suites on a configured torus map and
//! writes a JSON report, CSV tables and plot data into an output directory.
//!
//! Exit codes: 0 pass, 1 verification failure (or output error), 2
//! inconclusive (a search budget ran out), 3 invalid configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::ExperimentConfig;
use report::OutDir;
use suites::{run_experiment, RunError, Suite};

const DEFAULT_OUT: &str = "torus-lab-out";

#[derive(Debug, Parser)]
#[command(
    name = "torus-lab",
    version,
    about = "Numerical checks for non-resonant torus maps"
)]
struct Cli {
    /// Suite to run.
    #[arg(value_enum)]
    suite: Suite,
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (also `TORUS_LAB_OUT`); overrides `output_dir`.
    #[arg(long, env = "TORUS_LAB_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for the parallel searches.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("torus-lab: {e}");
                return ExitCode::from(3);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("torus-lab: --threads must be positive");
            return ExitCode::from(3);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global thread pool is configured once");
    }
    let out_path = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut out = match OutDir::create(&out_path) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("torus-lab: cannot create {}: {e}", out_path.display());
            return ExitCode::from(1);
        }
    };

    match run_experiment(&cfg, cli.suite, &mut out) {
        Ok((report, timings)) => {
            for c in &report.checks {
                println!(
                    "{:<12} {:<13} {}: {}",
                    c.suite,
                    format!("{:?}", c.status).to_lowercase(),
                    c.name,
                    c.summary
                );
            }
            let total: f64 = timings.iter().map(|t| t.seconds).sum();
            println!(
                "{} on {}: {:?} in {total:.1} s, report in {}",
                report.suite,
                cfg.map.name(),
                report.status,
                out_path.join("report.json").display()
            );
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(RunError::Config(e)) => {
            eprintln!("torus-lab: {e}");
            ExitCode::from(3)
        }
        Err(RunError::Io(e)) => {
            eprintln!("torus-lab: {e}");
            ExitCode::from(1)
        }
    }
}
