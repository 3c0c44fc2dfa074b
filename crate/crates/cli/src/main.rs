//! `bergquant`: runs one check per invocation and writes `<subcommand>.csv`
//! and `summary.json` into the output directory.
//!
//! Exit status: 0 when every asserted check passes, 1 on a check failure
//! (or a trend failure under `--strict`), 2 on configuration or
//! computation errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::ExperimentConfig;
use output::{write_json, Summary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{case}: {source}")]
    Computation {
        case: String,
        #[source]
        source: bergquant::Error,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::ConfigInvalid(msg.into())
    }

    pub fn case(case: impl Into<String>, source: bergquant::Error) -> Self {
        CliError::Computation {
            case: case.into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Subcommand {
    LocalKernel,
    Demailly,
    OtCheck,
    MtCheck,
    LemmaSphere,
    #[value(name = "cp1-c11")]
    Cp1C11,
    Berndtsson,
    Doubling,
    LowerBound,
    TailMass,
    Energy,
    MeasureQuantize,
}

#[derive(Debug, Parser)]
#[command(name = "bergquant", version, about = "Bergman kernel and quantization checks")]
struct Args {
    /// Check to run.
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// TOML configuration; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving the CSV and summary.json.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for sampled checks; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Treat trend warnings as failures.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> Result<bool, CliError> {
    let name = args
        .subcommand
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    debug_assert!(commands::SUBCOMMANDS.contains(&name.as_str()));
    let cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate(&name)?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(1);
    let report = commands::run(&name, &cfg, seed)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out_dir.display())))?;
    let csv_name = format!("{name}.csv");
    report.write_csv(&args.out_dir.join(&csv_name))?;
    let checks_pass = report.checks_pass();
    let trends_pass = report.trends_pass();
    let pass = checks_pass && (trends_pass || !args.strict);
    let summary = Summary {
        subcommand: &name,
        seed,
        strict: args.strict,
        pass,
        checks_pass,
        trends_pass,
        csv: csv_name,
        rows: report.rows.len(),
        info: &report.info,
        checks: &report.checks,
        trends: &report.trends,
    };
    write_json(&args.out_dir.join("summary.json"), &summary)?;

    let failed = report.checks.iter().filter(|r| !r.pass).count();
    for t in report.trends.iter().filter(|t| !t.ok) {
        eprintln!("warning: trend {} not satisfied {}", t.name, t.detail);
    }
    println!(
        "{name}: {} ({} checks, {failed} failed; {} trends, {} warnings)",
        if pass { "PASS" } else { "FAIL" },
        report.checks.len(),
        report.trends.len(),
        report.trends.iter().filter(|t| !t.ok).count()
    );
    Ok(pass)
}
