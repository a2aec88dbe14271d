//! `corrclust`: generate instances, solve relaxations, round, derandomize
//! and run the verification sweeps. Every subcommand except `gen` prints a
//! JSON report.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 verification failure,
//! 3 resource limit.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use corrclust::lp::Backend;
use corrclust::Error;

#[derive(Debug, Parser)]
#[command(name = "corrclust", version, about = "Correlation clustering with Sherali-Adams pivot rounding")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections (default: available parallelism).
    #[arg(long, global = true, env = "CORRCLUST_THREADS")]
    pub threads: Option<usize>,
    /// Include wall-clock timings in reports.
    #[arg(long, global = true)]
    pub timings: bool,
    /// LP backend.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Auto)]
    pub backend: BackendArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Auto,
    Dense,
    Sparse,
    Highs,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Dense => Backend::Dense,
            BackendArg::Sparse => Backend::Sparse,
            BackendArg::Highs => Backend::Highs,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance in the text format.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Solve the standard LP.
    Lp {
        /// Instance file; reads stdin when omitted or `-`.
        instance: Option<PathBuf>,
    },
    /// Solve the r-round Sherali-Adams relaxation.
    Sa {
        #[arg(long)]
        rounds: usize,
        /// Also write the valuation as JSON to this file.
        #[arg(long)]
        valuation_out: Option<PathBuf>,
        instance: Option<PathBuf>,
    },
    /// Randomized pivot rounding.
    Round {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rounds of the Sherali-Adams relaxation for `--algo sa`.
        #[arg(long, default_value_t = 4)]
        rounds: usize,
        instance: Option<PathBuf>,
    },
    /// Deterministic Sherali-Adams rounding with a ratio certificate.
    Derand {
        #[arg(long, default_value_t = 4)]
        rounds: usize,
        instance: Option<PathBuf>,
    },
    /// Verification sweeps and certificate checks.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Exact optimum by brute force (n <= 12).
    Oracle { instance: Option<PathBuf> },
    /// Compare all algorithms on a small benchmark suite.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Rounds used by the Sherali-Adams rows.
        #[arg(long, default_value_t = 3)]
        rounds: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenFamily {
    /// Star integrality-gap instance with k leaves.
    Star { k: usize },
    /// Uniform random signs.
    Random {
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p_plus: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Kwik,
    Lpkwik,
    Cmsy,
    Sa,
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Sweep triangle profiles against the bound tables.
    Ratios {
        /// Row to sweep: ppp, pmm, mmm, ppm, ppm-notbad, deg or all.
        #[arg(long = "type", default_value = "all")]
        kind: String,
        /// ideal, special or both.
        #[arg(long, default_value = "ideal")]
        table: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 60)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Two bad triangles sharing an edge force the third pair close.
    Badbad {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bad triangles never outnumber chargeable ones around a center.
    Numbad {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 40)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Constants and spot values recomputed from the closed forms.
    Constants,
    /// Re-check a report written by `derand`.
    Certificate {
        /// Report file; reads stdin when omitted or `-`.
        report: Option<PathBuf>,
        /// Instance file overriding the one embedded in the report.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Verification(_) => 2,
            Error::ResourceLimit(_) => 3,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.global.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
