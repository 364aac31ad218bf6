//! `pslab`: batch front end for the product-set combinatorics library.
//!
//! Exit codes: 0 success, 1 domain error, 2 enumeration cap exceeded,
//! 3 I/O or parse error (including unknown subcommands and flags).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pslab_core::bigjson;
use pslab_core::energy::{
    decompose_matrix, energy_count, lemma2_bound, matrix_count, CountMethod, EnergySpec,
};
use pslab_core::model::{condition_ratios, ExperimentConfig};
use pslab_core::montecarlo::{binomial_moment_exact, run_trials, write_trials_csv};
use pslab_core::productset::{product_statistics, ProductQuery, DEFAULT_CAP};
use pslab_core::rankin::{rankin_bound, rankin_sum_exact, RankinQuery};
use pslab_core::sampler::{sample_set, SeedSpec};
use pslab_core::ErrorKind;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "pslab",
    version,
    about = "Exact product-set combinatorics and Monte Carlo checks"
)]
struct Cli {
    /// Enumeration cap for counting subcommands.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: u64,

    /// Output format where a subcommand supports more than one.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random subset of {1..n} including each element with probability alpha.
    Sample {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Product-set statistics for explicit sets.
    Product {
        #[arg(long)]
        config: PathBuf,
    },
    /// Count solutions of a_1...a_n = b_1...b_m with a_i <= x_i, b_j <= y_j.
    Energy {
        #[arg(long, value_parser = parse_reals)]
        x: Reals,
        #[arg(long, value_parser = parse_reals)]
        y: Reals,
        #[arg(long, value_enum, default_value = "grouped")]
        method: MethodArg,
    },
    /// Count m x n matrices with bounded column and row products.
    MatrixCount(MatrixArgs),
    /// Evaluate the matrix-count bound without its implied constant.
    Bound(MatrixArgs),
    /// Factor a_1...a_n = b_1...b_m into a matrix with those column and row products.
    Decompose {
        #[arg(long, value_parser = parse_integers)]
        a: Integers,
        #[arg(long, value_parser = parse_integers)]
        b: Integers,
    },
    /// Truncated multiple harmonic sum, optionally with the Rankin bound.
    Rankin {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        bound: bool,
    },
    /// Regime ratios for an experiment configuration.
    Condition {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run seeded trials and compare product-set sizes with the prediction.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Exact moment E(|A|^k) of a Binomial(n, alpha) set size.
    Moments {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_reals)]
    x: Reals,
    #[arg(long, value_parser = parse_reals)]
    y: Reals,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Brute,
    Grouped,
}

impl From<MethodArg> for CountMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Brute => CountMethod::Brute,
            MethodArg::Grouped => CountMethod::Grouped,
        }
    }
}

// Newtypes keep clap from treating the lists as repeated flags.
#[derive(Clone, Debug)]
struct Reals(Vec<f64>);

#[derive(Clone, Debug)]
struct Integers(Vec<u64>);

fn parse_reals(s: &str) -> Result<Reals, String> {
    s.split(',')
        .map(|t| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Reals)
}

fn parse_integers(s: &str) -> Result<Integers, String> {
    s.split(',')
        .map(|t| t.parse::<u64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Integers)
}

enum Failure {
    Library(pslab_core::Error),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Library(e) => match e.kind() {
                ErrorKind::Domain => 1,
                ErrorKind::Resource => 2,
            },
            Failure::Io(_) => 3,
        }
    }
}

impl From<pslab_core::Error> for Failure {
    fn from(e: pslab_core::Error) -> Self {
        Failure::Library(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            let code = match e.kind() {
                K::DisplayHelp | K::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            match &failure {
                Failure::Library(e) => eprintln!("pslab: {e}"),
                Failure::Io(msg) => eprintln!("pslab: {msg}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Sample {
            n,
            alpha,
            seed,
            stream,
        } => {
            let set = sample_set(*n, *alpha, SeedSpec::new(*seed, *stream))?;
            if format == Some(Format::Json) {
                Ok(json_line(
                    &json!({ "n": set.n(), "elements": set.elements() }),
                ))
            } else {
                Ok(set.elements().iter().map(|e| format!("{e}\n")).collect())
            }
        }
        Command::Product { config } => {
            let query = ProductQuery::from_json(&read_json_text(config)?)?;
            let stats = product_statistics(&query, cli.cap)?;
            if format == Some(Format::Csv) {
                Ok(format!(
                    "tuple_count,distinct,energy,deficiency\n{},{},{},{}\n",
                    stats.tuple_count, stats.distinct_count, stats.energy, stats.deficiency
                ))
            } else {
                Ok(json_line(&stats))
            }
        }
        Command::Energy { x, y, method } => {
            let spec = EnergySpec::new(x.0.clone(), y.0.clone())?;
            let count = energy_count(&spec, (*method).into(), cli.cap)?;
            Ok(json_line(&bigjson::to_value(&count)))
        }
        Command::MatrixCount(args) => {
            let count = matrix_count(args.m, args.n, &args.x.0, &args.y.0, cli.cap)?;
            Ok(json_line(&bigjson::to_value(&count)))
        }
        Command::Bound(args) => {
            let bound = lemma2_bound(args.m, args.n, &args.x.0, &args.y.0)?;
            Ok(json_line(&bound))
        }
        Command::Decompose { a, b } => {
            let matrix = decompose_matrix(&a.0, &b.0)?;
            if format == Some(Format::Csv) {
                let mut out = String::new();
                for row in matrix.entries() {
                    let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                    writeln!(out, "{}", cells.join(",")).unwrap();
                }
                Ok(out)
            } else {
                Ok(json_line(&matrix))
            }
        }
        Command::Rankin { m, x, bound } => {
            let query = RankinQuery::new(*m, *x)?;
            let sum = rankin_sum_exact(&query)?;
            let bound = if *bound {
                Some(rankin_bound(&query)?)
            } else {
                None
            };
            if format == Some(Format::Json) {
                let mut obj = json!({ "m": m, "x": x, "sum": sum });
                if let Some(b) = bound {
                    obj["bound"] = json!(b);
                    obj["ratio"] = json!(sum / b);
                }
                Ok(json_line(&obj))
            } else if let Some(b) = bound {
                Ok(format!(
                    "m,x,sum,bound,ratio\n{m},{x},{sum},{b},{}\n",
                    sum / b
                ))
            } else {
                Ok(format!("m,x,sum\n{m},{x},{sum}\n"))
            }
        }
        Command::Condition { config } => {
            let config = read_config(config)?;
            Ok(json_line(&condition_ratios(&config)?))
        }
        Command::Verify {
            config,
            trials,
            eps,
            seed,
            out,
            summary,
        } => {
            let config = read_config(config)?;
            let (records, result) = run_trials(&config, *trials, *eps, *seed, cli.cap)?;
            let mut csv = Vec::new();
            write_trials_csv(&mut csv, config.s(), &records).expect("in-memory write");
            let mut report = serde_json::to_value(&result).expect("serializable summary");
            let condition = condition_ratios(&config).ok();
            report["condition_ratios"] = json!(condition.as_ref().map(|c| &c.ratios));
            report["regime_log_product"] = json!(condition.as_ref().map(|c| c.log_product));
            let text = json_line(&report);
            write_file(out, &csv)?;
            if let Some(path) = summary {
                write_file(path, text.as_bytes())?;
            }
            Ok(text)
        }
        Command::Moments { n, alpha, k } => {
            if !(0.0..=1.0).contains(alpha) {
                return Err(pslab_core::Error::Domain(format!(
                    "alpha = {alpha} is not a probability"
                ))
                .into());
            }
            if *k == 0 {
                return Err(pslab_core::Error::Domain("k must be at least 1".into()).into());
            }
            let moment = binomial_moment_exact(*n, *alpha, *k);
            let mean_power = (*alpha * *n as f64).powi(*k as i32);
            Ok(json_line(&json!({
                "n": n,
                "alpha": alpha,
                "k": k,
                "moment": moment,
                "mean_power": mean_power,
                "ratio": moment / mean_power,
            })))
        }
    }
}

fn json_line<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable output");
    s.push('\n');
    s
}

/// Reads a file and checks that it is well-formed JSON.
fn read_json_text(path: &Path) -> Result<String, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str::<Value>(&text)
        .map_err(|e| Failure::Io(format!("{} is not valid JSON: {e}", path.display())))?;
    Ok(text)
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    Ok(ExperimentConfig::from_json(&read_json_text(path)?)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}
