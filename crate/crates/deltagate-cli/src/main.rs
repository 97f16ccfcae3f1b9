//! `deltagate`: scenario runner for delta-barrier wavefront evolution.
//!
//! Exit codes: 0 success; 1 failed computation or failed oracle check;
//! 2 configuration or usage error; 3 classification ended Indeterminate.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::OutputOptions;
use config::{ConfigError, ScenarioConfig};
use output::Format;

#[derive(Parser)]
#[command(
    name = "deltagate",
    version,
    about = "Wavefront evolution across a single delta barrier: exact tables, \
             short-time expansions, numerical cross-checks, and barrier classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the exact solution on a grid, with and without the barrier.
    Evolve(RunArgs),
    /// Emit short-time series coefficients and exact-vs-series residuals.
    Expand(RunArgs),
    /// Run the numerical cross-check battery (lattice and spectral oracles).
    Oracle(RunArgs),
    /// Classify the barrier kind from the transmitted-side time exponent.
    Classify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML); see the presets/ directory for the schema.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: fig2, fig3, fig5-real or fig5-imag.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Directory for emitted tables and sidecars.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override the validity-window safety factor used by classify.
    #[arg(long, value_name = "F")]
    safety_factor: Option<f64>,
    /// Table output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl RunArgs {
    fn scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        match (&self.config, &self.preset) {
            (Some(path), None) => ScenarioConfig::load(path),
            (None, Some(name)) => ScenarioConfig::preset(name),
            (None, None) => Err(ConfigError(
                "one of --config <PATH> or --preset <NAME> is required".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
        }
    }

    fn output_options(&self) -> OutputOptions {
        OutputOptions {
            out_dir: self.out.clone(),
            format: self.format,
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let (args, runner): (&RunArgs, fn(&ScenarioConfig, &RunArgs) -> anyhow::Result<u8>) =
        match &cli.command {
            Command::Evolve(args) => (args, |cfg, a| commands::evolve(cfg, &a.output_options())),
            Command::Expand(args) => (args, |cfg, a| commands::expand(cfg, &a.output_options())),
            Command::Oracle(args) => (args, |cfg, a| commands::oracle(cfg, &a.output_options())),
            Command::Classify(args) => (args, |cfg, a| {
                commands::classify_cmd(cfg, &a.output_options(), a.safety_factor)
            }),
        };
    let cfg = args.scenario()?;
    runner(&cfg, args)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code_for(&err))
        }
    }
}
