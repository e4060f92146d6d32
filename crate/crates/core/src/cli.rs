//! The `nomafd` command line: `solve`, `sweep`, `trace` and `oracle`.
//!
//! Each subcommand is a plain function returning the process exit status, so
//! the binary stays a one-liner and tests can call them directly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::grid_oracle;
use crate::channel::{fairness_weights, generate_channels, generate_scenario};
use crate::config::CliConfig;
use crate::error::{Error, Result};
use crate::montecarlo::{iteration_trace_experiment, run_sweep, Algorithm};
use crate::report::{self, AllocationReport, OracleReport, RunDetails, SolveReport, SCHEMA_VERSION};
use crate::wmmse::solve;

pub const EXIT_OK: i32 = 0;
/// I/O and anything not covered below.
pub const EXIT_OTHER: i32 = 1;
/// Unreadable, malformed or invalid configuration, or bad flag values.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidConfig(_)
        | Error::InvalidScenario(_)
        | Error::UnknownUser(_)
        | Error::InvalidSicPair(..)
        | Error::OracleTooLarge { .. }
        | Error::OracleGrid { .. } => EXIT_CONFIG,
        Error::BisectionFailed { .. } => EXIT_SOLVER,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_OTHER,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nomafd",
    version,
    about = "WMMSE power allocation for NOMA full-duplex cells"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario and write the result as JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Output file; standard output when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Monte Carlo sweep; writes sweep.csv and sweep.json into the output directory.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Comma-separated subset of wmmse, oma_fd_greedy, oma_hd_waterfill, grid_oracle.
        #[arg(long, value_name = "LIST")]
        algorithms: Option<String>,
    },
    /// Per-iteration SINRs of the weak downlink users on one subcarrier, as CSV.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "INT")]
        subcarrier: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Grid oracle and WMMSE on one tiny instance.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Intervals per power dimension.
        #[arg(long, value_name = "INT")]
        grid_points: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, bytes)?;
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn finish(res: Result<()>) -> i32 {
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("nomafd: {e}");
            exit_code(&e)
        }
    }
}

fn load(config: Option<&Path>, seed: Option<u64>) -> Result<CliConfig> {
    let mut cfg = CliConfig::load_or_default(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

pub fn cmd_solve(config: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> i32 {
    finish((|| {
        let cfg = load(config, seed)?;
        let sc = generate_scenario(&cfg.scenario, cfg.seed)?;
        let h = generate_channels(&sc)?;
        let run = solve(&h, &fairness_weights(&sc), &cfg.scenario.budgets(), &cfg.solver, None)?;
        let rep = SolveReport::new(cfg.seed, &h, &cfg.scenario, &cfg.solver, &run);
        emit(out, report::to_json(&rep)?.as_bytes())
    })())
}

pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    let algs = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Algorithm::parse)
        .collect::<Result<Vec<_>>>()?;
    if algs.is_empty() {
        return Err(Error::Config("empty algorithm list".into()));
    }
    Ok(algs)
}

/// `seed` overrides the sweep's `seed0`.
pub fn cmd_sweep(config: Option<&Path>, seed: Option<u64>, out_dir: &Path, algorithms: Option<&str>) -> i32 {
    finish((|| {
        let cfg = CliConfig::load_or_default(config)?;
        let mut spec = cfg.sweep_spec();
        if let Some(seed) = seed {
            spec.seed0 = seed;
        }
        if let Some(list) = algorithms {
            spec.algorithms = parse_algorithms(list)?;
        }
        let result = run_sweep(&spec)?;
        fs::create_dir_all(out_dir)?;
        let mut csv_bytes = Vec::new();
        report::write_sweep_csv(&result, &mut csv_bytes)?;
        fs::write(out_dir.join("sweep.csv"), csv_bytes)?;
        fs::write(out_dir.join("sweep.json"), report::sweep_json(&result)?)?;
        Ok(())
    })())
}

pub fn cmd_trace(config: Option<&Path>, seed: Option<u64>, subcarrier: Option<usize>, out: Option<&Path>) -> i32 {
    finish((|| {
        let cfg = load(config, seed)?;
        let f = subcarrier.unwrap_or(cfg.trace.subcarrier);
        let trace = iteration_trace_experiment(&cfg.scenario, cfg.seed, &cfg.solver, f)?;
        let mut bytes = Vec::new();
        report::write_trace_csv(&trace, &mut bytes)?;
        emit(out, &bytes)
    })())
}

pub fn cmd_oracle(config: Option<&Path>, seed: Option<u64>, grid_points: Option<usize>, out: Option<&Path>) -> i32 {
    finish((|| {
        let cfg = load(config, seed)?;
        let grid = grid_points.unwrap_or(cfg.oracle.grid_points);
        let sc = generate_scenario(&cfg.scenario, cfg.seed)?;
        let h = generate_channels(&sc)?;
        let alpha = fairness_weights(&sc);
        let budgets = cfg.scenario.budgets();
        let oracle = grid_oracle(&h, &alpha, &budgets, grid)?;
        let run = solve(&h, &alpha, &budgets, &cfg.solver, None)?;
        let rep = OracleReport {
            schema_version: SCHEMA_VERSION,
            command: "oracle".into(),
            seed: cfg.seed,
            channel_digest: h.digest(),
            scenario: cfg.scenario.clone(),
            solver: cfg.solver.clone(),
            grid_points: grid,
            relative_gap: (oracle.weighted_sum_rate - run.objective()) / oracle.weighted_sum_rate,
            wmmse: AllocationReport::from_run(&run),
            wmmse_run: RunDetails::from_run(&run),
            oracle: AllocationReport::from_baseline(&oracle),
        };
        emit(out, report::to_json(&rep)?.as_bytes())
    })())
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve { common, out } => cmd_solve(common.config.as_deref(), common.seed, out.as_deref()),
        Command::Sweep {
            common,
            out,
            algorithms,
        } => cmd_sweep(common.config.as_deref(), common.seed, &out, algorithms.as_deref()),
        Command::Trace {
            common,
            subcarrier,
            out,
        } => cmd_trace(common.config.as_deref(), common.seed, subcarrier, out.as_deref()),
        Command::Oracle {
            common,
            grid_points,
            out,
        } => cmd_oracle(common.config.as_deref(), common.seed, grid_points, out.as_deref()),
    }
}

/// Parse `std::env::args` and run. Usage errors exit through clap with status 2.
pub fn main_from_args() -> i32 {
    run(Cli::parse())
}
