use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use error::CliResult;

#[derive(Parser)]
#[command(name = "adiaphase", version, about = "Adiabatic phases and interference terms of driven quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output path; overrides the scenario's `output` key.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the adiabatic and exact time series of a scenario as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Check interference terms against randomly re-phased eigenbases.
    GaugeTest {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random gauges.
        #[arg(long, default_value_t = 32)]
        gauges: usize,
        /// Drop the adiabatic phase factors (negative control; expected to fail).
        #[arg(long)]
        debug_drop_adiabatic_phase: bool,
    },
    /// Print the per-level adiabatic phases after one field period.
    Berry {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Maximum adiabatic-vs-exact error over one period for each epsilon = omega0 / mu_B.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01")]
        epsilons: Vec<f64>,
    },
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let output = |common: &Common, scenario: &config::Scenario| common.output.clone().or(scenario.output.clone());
    match cli.command {
        Command::Simulate { common } => {
            let scenario = config::load(&common.config)?;
            commands::simulate(&scenario, output(&common, &scenario).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::GaugeTest { common, seed, gauges, debug_drop_adiabatic_phase } => {
            let scenario = config::load(&common.config)?;
            let out = output(&common, &scenario);
            let passed = commands::gauge_test(&scenario, seed, gauges, debug_drop_adiabatic_phase, out.as_deref())?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Berry { config } => {
            commands::berry(&config::load(&config)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, epsilons } => {
            let scenario = config::load(&common.config)?;
            commands::sweep(&scenario, &epsilons, output(&common, &scenario).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
