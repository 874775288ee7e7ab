//! Experiment runner for the `paleyscope` verification suites.
//!
//! ```text
//! paleyscope <suite> --config experiment.json [--out DIR] [--threads N]
//! paleyscope exponents --gamma 2 --dim 1
//! ```
//!
//! Suites: `assumptions` (alias `verify-assumptions`), `lp-ratio`,
//! `sharp-bound`, `spde`, `exponents`, `kernel-dump`. Each writes
//! `<suite>.csv` and `<suite>.json` into the output directory (default
//! `out`, or `output.dir` from the config); `kernel-dump` also writes one
//! `PLSF` file per symbol.
//!
//! CSV columns:
//!
//! | suite          | columns |
//! |----------------|---------|
//! | `assumptions`  | `family,gamma_or_m,d,c0,c0_expected,delta0,theta_identities,ellipticity,psi7,pass` |
//! | `lp-ratio`     | `family,gamma_or_m,p,n,nt,ratio,C0_bound,pass` |
//! | `sharp-bound`  | `family,gamma,n,nt,sup_ratio_sharp,fs_ratio` |
//! | `spde`         | `family,gamma_or_m,M,K,estimate,exact,rel_error,std_error,kurtosis,pass` |
//! | `exponents`    | `gamma,d,c2,c3,delta0,mu1,mu2,mu3,identities,pass` |
//! | `kernel-dump`  | `index,family,file,bytes,sha256,max_abs` |
//!
//! The JSON report is an object with keys `suite`, `config_hash` (SHA-256 of
//! the canonical config), `config`, `pass` and `items`, one item per unit of
//! work with the same quantities in more detail. Exact rationals are strings
//! such as `"5/2"`. Floats are printed with 17 significant digits.
//!
//! Exit status: 0 when every check passes, 1 when any check fails, 2 on a
//! usage, configuration or I/O error. The thread count comes from
//! `--threads`, then `PALEY_THREADS`; 0 means one thread per core. Reports
//! do not depend on it.

pub mod config;
pub mod report;
pub mod suites;

use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser};
use paleyscope_core::assumptions::rational_from_f64;
use paleyscope_core::Rational64;
use thiserror::Error;

pub use config::ExperimentConfig;
use config::{canonical_suite, SUITES};
use report::{render_csv, render_json, sha256_hex, write_atomic, Obj};
pub use suites::{Experiment, SuiteOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("I/O: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "paleyscope", version, about = "Run a paleyscope verification suite")]
pub struct Args {
    /// Suite name: assumptions, lp-ratio, sharp-bound, spde, exponents, kernel-dump.
    pub suite: Option<String>,
    /// Suite name, as an alternative to the positional argument.
    #[arg(long = "suite", value_name = "NAME")]
    pub suite_flag: Option<String>,
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Symbol order for `exponents`, as a decimal or `p/q`.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Dimension for `exponents`.
    #[arg(long)]
    pub dim: Option<usize>,
}

pub fn usage() -> String {
    format!("{}\nsuites: {}", Args::command().render_usage(), SUITES.join(", "))
}

/// Files written by one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub suite: &'static str,
    pub pass: bool,
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Parses `2`, `0.5` or `1/2`.
pub fn parse_rational(text: &str) -> Result<Rational64, CliError> {
    let bad = || CliError::Usage(format!("cannot read `{text}` as a rational number"));
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    let x: f64 = text.trim().parse().map_err(|_| bad())?;
    rational_from_f64(x, 1000).map_err(|_| bad())
}

/// Runs one suite for a configuration and writes its reports into `out`.
pub fn run_experiment(config: &ExperimentConfig, suite: &str, out: &Path) -> Result<RunSummary, CliError> {
    run_with_cases(config, suite, out, None)
}

fn run_with_cases(
    config: &ExperimentConfig,
    suite: &str,
    out: &Path,
    cases: Option<Vec<(Rational64, usize)>>,
) -> Result<RunSummary, CliError> {
    let suite = canonical_suite(suite).ok_or_else(|| CliError::Usage(format!("unknown suite `{suite}`")))?;
    let exp = Experiment::new(config.clone())?;
    let outcome = match suite {
        "assumptions" => suites::assumptions(&exp),
        "lp-ratio" => suites::lp_ratio(&exp),
        "sharp-bound" => suites::sharp_bound(&exp),
        "spde" => suites::spde(&exp),
        "exponents" => {
            let cases = match cases {
                Some(c) => c,
                None => suites::exponent_cases(&exp)?,
            };
            suites::exponents(&cases)
        }
        "kernel-dump" => suites::kernel_dump(&exp),
        _ => unreachable!("canonical suite names are exhaustive"),
    };
    emit(&exp.config, &outcome, out)
}

/// Writes the CSV, JSON and any binary artefacts of a finished suite.
pub fn emit(config: &ExperimentConfig, outcome: &SuiteOutcome, out: &Path) -> Result<RunSummary, CliError> {
    let canonical = config.canonical_json();
    let config_value: serde_json::Value = serde_json::from_str(&canonical).expect("canonical config parses");
    let json = Obj::new()
        .set("suite", outcome.suite)
        .set("config_hash", sha256_hex(canonical.as_bytes()))
        .set("config", config_value)
        .set("pass", outcome.pass)
        .set("items", outcome.items.clone())
        .build();
    let mut files = vec![
        write_atomic(out, &format!("{}.csv", outcome.suite), render_csv(&outcome.header, &outcome.rows).as_bytes())?,
        write_atomic(out, &format!("{}.json", outcome.suite), render_json(&json).as_bytes())?,
    ];
    for (name, bytes) in &outcome.files {
        files.push(write_atomic(out, name, bytes)?);
    }
    Ok(RunSummary {
        suite: outcome.suite,
        pass: outcome.pass,
        files,
        lines: outcome.summary.clone(),
    })
}

fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("PALEY_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("PALEY_THREADS = `{v}` is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn resolve(args: &Args) -> Result<(&'static str, ExperimentConfig, PathBuf), CliError> {
    let config = match &args.config {
        Some(p) => Some(ExperimentConfig::load(p)?),
        None => None,
    };
    let named = match (&args.suite, &args.suite_flag) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!("suite given twice: `{a}` and `{b}`")));
        }
        (Some(a), _) | (None, Some(a)) => Some(a.clone()),
        (None, None) => config.as_ref().and_then(|c| c.suite.clone()),
    };
    let named = named.ok_or_else(|| CliError::Usage("no suite given".into()))?;
    let suite = canonical_suite(&named).ok_or_else(|| CliError::Usage(format!("unknown suite `{named}`")))?;
    let config = match config {
        Some(c) => c,
        None if suite == "exponents" => ExperimentConfig::default(),
        None => return Err(CliError::Usage(format!("suite `{suite}` needs --config"))),
    };
    let out = args
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((suite, config, out))
}

/// Parses arguments, runs the suite and returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&args) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            println!("{}: {}", summary.suite, if summary.pass { "PASS" } else { "FAIL" });
            if summary.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{}", usage());
            }
            e.exit_code()
        }
    }
}

pub fn run_cli(args: &Args) -> Result<RunSummary, CliError> {
    let (suite, config, out) = resolve(args)?;
    let threads = thread_count(args.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let cases = if suite == "exponents" && args.gamma.is_some() {
        let gamma = parse_rational(args.gamma.as_deref().unwrap_or_default())?;
        let d = args.dim.unwrap_or(config.grid.d);
        Some(vec![(gamma, d)])
    } else {
        if args.gamma.is_some() || args.dim.is_some() {
            if suite != "exponents" {
                return Err(CliError::Usage("--gamma and --dim apply to `exponents` only".into()));
            }
            return Err(CliError::Usage("--dim needs --gamma".into()));
        }
        None
    };
    pool.install(|| run_with_cases(&config, suite, &out, cases))
}
