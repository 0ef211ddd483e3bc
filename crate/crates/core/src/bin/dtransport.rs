use clap::{Parser, Subcommand};
use dissipative_transport::experiments::{
    compare_modes, run_single, run_sweep, validate, ExperimentConfig, ExperimentError,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dtransport", version, about = "Dissipative transport on a ring of two-level systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write occupation.csv, summary.json and trace_distance.csv.
    Simulate(RunArgs),
    /// Run every value of the config's sweep section and write comparison.json.
    Sweep(RunArgs),
    /// Run identical physics in Redfield and Markov modes.
    Compare(RunArgs),
    /// Run the coefficient oracle suite and, for small lattices, the exact oracle.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to `output.dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), ExperimentError> {
        let config = ExperimentConfig::load(&self.config)?;
        let out = self
            .out
            .clone()
            .or_else(|| config.output.dir.clone())
            .ok_or_else(|| ExperimentError::Invalid {
                field: "output.dir".into(),
                message: "no output directory: pass --out or set output.dir".into(),
            })?;
        Ok((config, out))
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), ExperimentError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::FAILURE
}

fn run(command: Command) -> Result<ExitCode, ExperimentError> {
    match command {
        Command::Simulate(args) => {
            let (config, out) = args.load()?;
            let artifact = run_single(&config, &out)?;
            log::info!("wrote {}", artifact.dir.display());
            print_json(&artifact.summary)?;
        }
        Command::Sweep(args) => {
            let (config, out) = args.load()?;
            let report = run_sweep(&config, &out)?;
            for f in &report.failures {
                log::warn!("sweep value {} failed: {}", f.value, f.message);
            }
            print_json(&report)?;
            if !report.failures.is_empty() {
                return Ok(fail(
                    "sweep_partial_failure",
                    format!("{} of {} sweep values failed", report.failures.len(), report.failures.len() + report.rows.len()),
                ));
            }
        }
        Command::Compare(args) => {
            let (config, out) = args.load()?;
            let cmp = compare_modes(&config, Some(Path::new(&out)))?;
            print_json(&cmp)?;
        }
        Command::Validate { config } => {
            let config = ExperimentConfig::load(&config)?;
            let report = validate(&config)?;
            print_json(&report)?;
            if !report.passed {
                return Ok(fail("validation_failed", "one or more oracle checks failed".into()));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => fail(e.kind(), e.to_string()),
    }
}
