//! momentlab: experiment runner for the symplectic-connection laboratory.
//!
//! Exit codes: 0 all checks pass, 1 numerical failure, 2 usage error.

mod config;
mod plot;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Kind};
use momentlab::suite::Level;

#[derive(Parser)]
#[command(
    name = "momentlab",
    about = "Numerical laboratory for unitary connections with symplectic curvature on flat tori",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Experiment configuration as a JSON document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw; overrides the config key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Residual tolerance; overrides the config key.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the deterministic verification suite.
    Verify {
        /// quick = T² checks only; full adds the T⁴ checks.
        #[arg(long, value_parser = parse_level)]
        level: Option<Level>,
    },
    /// Solve the prescribed-volume problem by gradient flow.
    Flow,
    /// Compute the holonomy of a Hamiltonian rotation loop on S².
    Weinstein {
        /// Rotation axis as x,y,z.
        #[arg(long, value_parser = parse_axis)]
        axis: Option<[f64; 3]>,
        #[arg(long)]
        turns: Option<i64>,
        #[arg(long)]
        substeps: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Probe the moment-map identity and emit witness records.
    MomentCheck {
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Render a line chart from a trace CSV.
    Plot {
        /// Input CSV with a named header row.
        input: PathBuf,
        /// Comma-separated column names: x first, then the series.
        #[arg(long)]
        columns: String,
        /// Logarithmic y-axis (for residual columns).
        #[arg(long)]
        logy: bool,
        /// Output SVG path.
        #[arg(long)]
        output: PathBuf,
    },
}

fn parse_level(s: &str) -> Result<Level, String> {
    match s {
        "quick" => Ok(Level::Quick),
        "full" => Ok(Level::Full),
        other => Err(format!("unknown level {other:?}; use quick or full")),
    }
}

fn parse_axis(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err("axis needs exactly three components".into());
    }
    Ok([parts[0], parts[1], parts[2]])
}

const EXIT_NUMERICAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut config = match &cli.global.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.global.out {
        config.out = Some(out.clone());
    }
    if let Some(tol) = cli.global.tol {
        if tol <= 0.0 {
            eprintln!("error: tolerances must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        config.tol = Some(tol);
    }

    let kind = match &cli.command {
        Command::Verify { level } => {
            if let Some(level) = level {
                config.level = Some(*level);
            }
            Kind::Verify
        }
        Command::Flow => Kind::Flow,
        Command::Weinstein {
            axis,
            turns,
            substeps,
            samples,
        } => {
            if let Some(axis) = axis {
                config.weinstein.axis = *axis;
            }
            if let Some(turns) = turns {
                config.weinstein.turns = *turns;
            }
            if let Some(substeps) = substeps {
                config.weinstein.substeps = *substeps;
            }
            if let Some(samples) = samples {
                config.weinstein.samples = *samples;
            }
            Kind::Weinstein
        }
        Command::MomentCheck { probes } => {
            if let Some(p) = probes {
                config.moment_check.probes_t2 = *p;
            }
            Kind::MomentCheck
        }
        Command::Plot {
            input,
            columns,
            logy,
            output,
        } => {
            let names: Vec<String> = columns.split(',').map(|c| c.trim().to_string()).collect();
            return match plot::emit_plot(input, &names, *logy, output) {
                Ok(()) => {
                    println!("plot: wrote {}", output.display());
                    ExitCode::SUCCESS
                }
                Err(e @ momentlab::Error::MissingColumn { .. })
                | Err(e @ momentlab::Error::EmptyCsv)
                | Err(e @ momentlab::Error::InvalidConfig(_)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_NUMERICAL)
                }
            };
        }
    };

    match runner::run_experiment(kind, &config) {
        Ok(outcome) if outcome.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(EXIT_NUMERICAL),
        Err(e @ momentlab::Error::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
