mod config;
mod failure;
mod pipeline;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Mode, RunConfig};
use failure::{Diagnostics, Failure, FailureKind};

#[derive(Parser)]
#[command(name = "nozzle-shock", version, about = "Transonic shock positions in an almost flat nozzle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate admissible shock positions and solve for each one.
    Run(RunArgs),
    /// Check a configuration and report what a run would find.
    Validate(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    /// TOML (or .json) run configuration.
    #[arg(long, env = "NOZZLE_SHOCK_CONFIG")]
    config: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output directory.
    #[arg(long, env = "NOZZLE_SHOCK_OUT")]
    out: PathBuf,
    #[arg(long, value_enum, env = "NOZZLE_SHOCK_MODE")]
    mode: Option<Mode>,
    /// Worker threads for the per-root solves; 0 uses every core.
    #[arg(long, env = "NOZZLE_SHOCK_THREADS", default_value_t = 0)]
    threads: usize,
    /// Overrides grids.n_eta.
    #[arg(long, env = "NOZZLE_SHOCK_SEED_GRID")]
    seed_grid: Option<usize>,
}

fn config_error(message: String) -> ExitCode {
    let diag = Diagnostics::from_failures(vec![Failure::new(FailureKind::Config, message)]);
    eprintln!("{}", diag.to_json());
    ExitCode::from(diag.exit_code as u8)
}

fn run(args: RunArgs) -> ExitCode {
    let mut cfg = match RunConfig::load(&args.config.config) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(n) = args.seed_grid {
        cfg.grids.n_eta = n;
    }
    let setup = match cfg.build() {
        Ok(s) => s,
        Err(e) => return config_error(e),
    };
    let outcome = pipeline::run(&setup, &args.out, args.threads);
    if let Some(s) = &outcome.summary {
        log::info!("{} admissible location(s), {} solved", s.admissible_locations, s.non_uniqueness_count);
    }
    ExitCode::from(outcome.exit_code as u8)
}

fn validate(args: ConfigArg) -> ExitCode {
    let report = match RunConfig::load(&args.config) {
        Ok(cfg) => serde_json::to_value(validate::validate(&cfg)),
        Err(e) => serde_json::to_value(serde_json::json!({ "checks": [{ "name": "parse", "ok": false, "detail": e }], "verdict": "invalid configuration" })),
    };
    println!("{}", serde_json::to_string_pretty(&report.expect("report serializes")).expect("report serializes"));
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Validate(args) => validate(args),
    }
}
