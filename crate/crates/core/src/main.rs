use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coopsim::cli;
use coopsim::scenario::Override;

/// Edge-assisted collaborative object detection simulator.
///
/// SCENARIO is a scenario file path or a bundled preset name (`parking`,
/// `intersection`). Output files go to $COOPSIM_OUT_DIR (default `coopsim-out`).
#[derive(Parser)]
#[command(name = "coopsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its verdict records and summary.
    Run {
        scenario: String,
        /// `dotted.path=value`, e.g. `run.seed=7`. Repeatable.
        #[arg(short = 'o', long = "override")]
        overrides: Vec<Override>,
    },
    /// Collaborative vs single-CAV accuracy, one row per scenario.
    Compare {
        #[arg(required = true)]
        scenarios: Vec<String>,
        #[arg(short = 'o', long = "override")]
        overrides: Vec<Override>,
        /// Consecutive seeds per scenario.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// One run per value of a parameter axis.
    Sweep {
        scenario: String,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(short = 'o', long = "override")]
        overrides: Vec<Override>,
    },
    /// Edge operation counts over a grid of CAV and detection counts.
    ProbeComplexity {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
        cavs: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
        objects: Vec<usize>,
    },
    /// Turn a comparison table into per-series plot data.
    Plotdata { metrics: PathBuf },
    /// Check a scenario against the schema.
    Validate {
        scenario: String,
        #[arg(short = 'o', long = "override")]
        overrides: Vec<Override>,
        /// Print the canonical form instead of a summary line.
        #[arg(long)]
        canonical: bool,
    },
}

fn main() -> ExitCode {
    let out = cli::out_dir_from_env();
    let result = match Cli::parse().command {
        Command::Run {
            scenario,
            overrides,
        } => cli::cmd_run(&scenario, &overrides, &out),
        Command::Compare {
            scenarios,
            overrides,
            seeds,
        } => cli::cmd_compare(&scenarios, &overrides, seeds, &out),
        Command::Sweep {
            scenario,
            axis,
            values,
            overrides,
        } => cli::cmd_sweep(&scenario, &overrides, &axis, &values, &out),
        Command::ProbeComplexity { cavs, objects } => cli::cmd_probe(&cavs, &objects, &out),
        Command::Plotdata { metrics } => cli::cmd_plotdata(&metrics, &out),
        Command::Validate {
            scenario,
            overrides,
            canonical,
        } => cli::cmd_validate(&scenario, &overrides, canonical),
    };
    match result {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
