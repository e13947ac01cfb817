//! Command-line front end: `simulate`, `fit`, `eval` and `bench`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{format_summary, run_bench, summarize, write_rows, BenchConfig};
use crate::data::DataSplit;
use crate::dimsearch::{run_sdr_with, PenaltyConfig, SdrOutcome, SearchOptions};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::vector_correlation;
use crate::network::{Activation, TrainConfig};
use crate::simgen::{generate, ModelSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "grnn-sdr", version, about = "Neural-network sufficient dimension reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset and its true basis
    Simulate(SimulateArgs),
    /// Estimate the structural dimension and central space of a dataset
    Fit(FitArgs),
    /// Vector correlation between a fitted basis and a true basis
    Eval(EvalArgs),
    /// Run replicated experiments from a config file
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model number, 1 to 7
    #[arg(long)]
    pub model: u8,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub p: usize,
    /// Noise multiplier (model 3 always uses 0.5)
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes PREFIX_data.csv and PREFIX_beta.csv
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV with header x1,...,xp,y
    #[arg(long)]
    pub data: PathBuf,
    /// Result JSON path
    #[arg(long)]
    pub out: PathBuf,
    /// Optional test dataset for per-k test MSE
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub val_frac: f64,
    /// Second hidden layer width
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long, default_value = "tanh")]
    pub activation: String,
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long, default_value_t = PenaltyConfig::default().scale)]
    pub pen_scale: f64,
    /// Fixed penalty replacing the formula
    #[arg(long)]
    pub pen_override: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report l + 1 at refinement exit
    #[arg(long)]
    pub paper_literal_offset: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Result JSON written by `fit`
    #[arg(long)]
    pub result: PathBuf,
    /// True basis CSV
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML (or .json) experiment config
    #[arg(long)]
    pub config: PathBuf,
    /// Results CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's thread count
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Also write each replication's result JSON into this directory
    #[arg(long)]
    pub save_fits: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

pub fn execute<W: Write>(command: Command, out: &mut W) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a, out),
        Command::Fit(a) => fit(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn simulate<W: Write>(a: SimulateArgs, out: &mut W) -> Result<()> {
    let mut spec = ModelSpec::new(a.model, a.n, a.p, a.seed);
    spec.noise = a.noise;
    let data = generate(&spec)?;
    let data_path = with_suffix(&a.out, "_data.csv");
    let beta_path = with_suffix(&a.out, "_beta.csv");
    io::write_dataset_file(&data_path, &data.x, &data.y)?;
    io::write_basis_file(&beta_path, &data.beta_true)?;
    writeln!(out, "data: {}", data_path.display())?;
    writeln!(out, "beta: {}", beta_path.display())?;
    writeln!(out, "d_true: {}", data.d_true)?;
    Ok(())
}

fn fit<W: Write>(a: FitArgs, out: &mut W) -> Result<()> {
    let (x, y) = io::read_dataset_file(&a.data)?;
    let mut split = DataSplit::shuffled(&x, &y, a.val_frac, a.seed)?;
    if let Some(test) = &a.test {
        let (xt, yt) = io::read_dataset_file(test)?;
        split = split.with_test(xt, yt)?;
    }
    let cfg = TrainConfig {
        m: a.m,
        restarts: a.restarts,
        lambda: a.lambda,
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        activation: a.activation.parse::<Activation>()?,
        standardize: !a.no_standardize,
        seed: a.seed,
    };
    let pcfg = PenaltyConfig {
        scale: a.pen_scale,
        override_value: a.pen_override,
    };
    let opts = SearchOptions {
        paper_literal_offset: a.paper_literal_offset,
    };
    let outcome = run_sdr_with(&split, &cfg, &pcfg, opts)?;
    fs::write(&a.out, outcome.to_json()?)?;
    writeln!(out, "d_hat: {}", outcome.d_hat)?;
    writeln!(out, "pen: {:.6}", outcome.pen)?;
    writeln!(out, "k     mse_va       CR(k)")?;
    for (k, v) in &outcome.mse_table {
        writeln!(out, "{k:<5} {v:<12.6} {:.6}", crate::dimsearch::criterion(*v, *k, outcome.pen))?;
    }
    writeln!(out, "result: {}", a.out.display())?;
    Ok(())
}

fn eval<W: Write>(a: EvalArgs, out: &mut W) -> Result<()> {
    let outcome = SdrOutcome::from_json(&fs::read_to_string(&a.result)?)?;
    let truth = io::read_basis_file(&a.truth)?;
    let r = vector_correlation(&truth, &outcome.beta_hat)?;
    writeln!(out, "{r:.4}")?;
    Ok(())
}

fn bench<W: Write>(a: BenchArgs, out: &mut W) -> Result<()> {
    let mut cfg = BenchConfig::from_file(&a.config)?;
    if let Some(threads) = a.parallelism {
        cfg.parallelism = threads;
    }
    let reps = run_bench(&cfg)?;
    let rows: Vec<_> = reps.iter().map(|r| r.row.clone()).collect();
    write_rows(fs::File::create(&a.out)?, &rows)?;
    if let Some(dir) = &a.save_fits {
        fs::create_dir_all(dir)?;
        for rep in &reps {
            if let Some(outcome) = &rep.outcome {
                let name = format!("cell{}_rep{}.json", rep.cell, rep.row.rep);
                fs::write(dir.join(name), outcome.to_json()?)?;
            }
        }
    }
    write!(out, "{}", format_summary(&summarize(&cfg, &reps)))?;
    writeln!(out, "results: {}", a.out.display())?;
    Ok(())
}
