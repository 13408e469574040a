//! Batch front end: runs one verification pipeline over corpus files and
//! writes a JSON report. Exit status 0 when every asserted check passes, 1 when
//! one fails, 2 on parse or configuration errors.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Parser, Serialize)]
#[command(name = "covol", version, about = "Unit lattice covolume and Mahler measure verification")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// JSON report path; the summary always goes to standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusArgs {
    /// Field corpus JSON; the bundled corpus when omitted.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Restrict to the entry with this label.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Build each field and check the product formula on its units.
    Field {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Unit lattice: covolume, wedge norms, totally real bounds, pure wedges, μ search.
    Units {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Random pure-wedge round trips to run.
        #[arg(long, default_value_t = 20)]
        wedge_samples: usize,
        /// Largest k for the brute-force μ_{1,k} search (0 disables it).
        #[arg(long, default_value_t = 0)]
        mu_k: usize,
        /// Coefficient box for the μ search.
        #[arg(long, default_value_t = 1)]
        mu_bound: i64,
    },
    /// Complement basis, the constant c and fiber data.
    Geometry {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Solve the saddle point equation and check the critical-point bounds.
    Saddle {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Target y, comma separated; defaults to (log t, 0, ...).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
    /// Grid checks of the one-dimensional estimates, plus random checks of the
    /// moment, remainder and minor lemmas and the k = 1 contour closure.
    VerifyAsymptotics {
        /// Grid axes such as `m=1000,2000 kappa=0.5,1 r=0.51,1 D=1`.
        #[arg(long, num_args = 1..)]
        grid: Vec<String>,
        /// CSV path for the grid rows.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        rho_samples: usize,
        #[arg(long, default_value_t = 100)]
        minor_samples: usize,
        #[arg(long, default_value_t = 20)]
        moment_samples: usize,
    },
    /// Certified lower bound pipeline on the full-rank corpus entries.
    Bound {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long = "D", default_value_t = 1.0)]
        d: f64,
        #[arg(long = "N0", default_value_t = 1000.0)]
        n0: f64,
    },
    /// Mahler measures, face inequality, flags and Boyd limits.
    Mahler {
        /// Polynomial JSON (one polynomial or a labelled list); bundled list when omitted.
        #[arg(long)]
        poly: Option<PathBuf>,
        /// QMC points per shift.
        #[arg(long, default_value_t = 1 << 20)]
        points: usize,
        /// Direction for the Boyd substitution, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        boyd_a: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        boyd_k: Vec<u32>,
    },
    /// Bloch–Wigner values and functional relations.
    Bloch {
        /// Point `re,im` at which to evaluate D; repeatable.
        #[arg(long = "z", value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

fn configure_workers() -> Result<(), String> {
    let Ok(v) = std::env::var("COVOL_WORKERS") else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| format!("COVOL_WORKERS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("COVOL_WORKERS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", report.summary());
    if let Some(path) = &cli.common.out {
        if let Err(e) = std::fs::write(path, report.to_json(&cli)) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match report.first_failure() {
        None => ExitCode::SUCCESS,
        Some(name) => {
            eprintln!("check failed: {name}");
            ExitCode::from(1)
        }
    }
}
