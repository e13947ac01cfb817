//! Replicated simulation experiments.
//!
//! A [`BenchConfig`] lists experiment cells (model, sample size, dimension,
//! noise); each cell is run for a number of replications. Replication `r`
//! uses seed `base_seed + r·0x9E3779B9` (wrapping) for data generation, the
//! train/validation shuffle and training, so the same replication index sees
//! the same seed in every cell. Rows come back ordered by (cell, replication)
//! regardless of how many threads ran them.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataSplit;
use crate::dimsearch::{run_sdr_with, PenaltyConfig, SdrOutcome, SearchOptions};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, mse, vector_correlation};
use crate::network::TrainConfig;
use crate::simgen::{generate, ModelSpec};

pub const REPLICATION_STRIDE: u64 = 0x9E37_79B9;

pub const CSV_HEADER: &str =
    "model,n,p,noise,rep,d_hat,r,mse_train,mse_val,mse_test,nnl_calls,wall_seconds,seed,status";

fn default_val_frac() -> f64 {
    0.2
}

fn default_n_test() -> usize {
    1000
}

fn default_replications() -> usize {
    10
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub model: u8,
    /// Samples shared between training and validation.
    pub n_train_val: usize,
    #[serde(default = "default_val_frac")]
    pub val_frac: f64,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    pub p: usize,
    #[serde(default)]
    pub noise: Option<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default)]
    pub search: SearchOptions,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

impl BenchConfig {
    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: BenchConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::invalid("bench config has no cells"));
        }
        for (i, c) in self.cells.iter().enumerate() {
            if c.replications == 0 {
                return Err(Error::invalid(format!("cell {i}: replications must be >= 1")));
            }
            if !(c.val_frac > 0.0 && c.val_frac < 1.0) {
                return Err(Error::invalid(format!("cell {i}: val_frac must be in (0, 1)")));
            }
            ModelSpec::new(c.model, c.n_train_val, c.p, 0).validate()?;
        }
        self.train.validate()
    }

    /// Seed of replication `rep`.
    pub fn replication_seed(&self, rep: usize) -> u64 {
        self.base_seed.wrapping_add((rep as u64).wrapping_mul(REPLICATION_STRIDE))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: u8,
    pub n: usize,
    pub p: usize,
    pub noise: f64,
    pub rep: usize,
    pub d_hat: Option<usize>,
    pub r: Option<f64>,
    pub mse_train: Option<f64>,
    pub mse_val: Option<f64>,
    pub mse_test: Option<f64>,
    pub nnl_calls: Option<usize>,
    pub wall_seconds: f64,
    pub seed: u64,
    pub status: String,
}

/// One finished replication.
#[derive(Debug, Clone)]
pub struct Replication {
    pub cell: usize,
    pub row: BenchRow,
    pub outcome: Option<SdrOutcome>,
}

/// Generates data for one replication: `(split with test data, true basis)`.
pub fn replication_data(cell: &CellSpec, seed: u64) -> Result<(DataSplit, crate::linalg::Matrix)> {
    let mut spec = ModelSpec::new(cell.model, cell.n_train_val + cell.n_test, cell.p, seed);
    spec.noise = cell.noise;
    let data = generate(&spec)?;
    let train_val: Vec<usize> = (0..cell.n_train_val).collect();
    let test: Vec<usize> = (cell.n_train_val..cell.n_train_val + cell.n_test).collect();
    let mut split = DataSplit::shuffled(
        &data.x.select_rows(&train_val),
        &data.y[..cell.n_train_val],
        cell.val_frac,
        seed,
    )?;
    if cell.n_test > 0 {
        split = split.with_test(data.x.select_rows(&test), data.y[cell.n_train_val..].to_vec())?;
    }
    Ok((split, data.beta_true))
}

pub fn run_replication(cfg: &BenchConfig, cell_index: usize, rep: usize) -> Replication {
    let cell = &cfg.cells[cell_index];
    let seed = cfg.replication_seed(rep);
    let mut spec = ModelSpec::new(cell.model, cell.n_train_val, cell.p, seed);
    spec.noise = cell.noise;
    let mut row = BenchRow {
        model: cell.model,
        n: cell.n_train_val,
        p: cell.p,
        noise: spec.noise_level(),
        rep,
        d_hat: None,
        r: None,
        mse_train: None,
        mse_val: None,
        mse_test: None,
        nnl_calls: None,
        wall_seconds: 0.0,
        seed,
        status: "ok".into(),
    };
    let start = Instant::now();
    let result = (|| -> Result<SdrOutcome> {
        let (split, beta_true) = replication_data(cell, seed)?;
        let train = TrainConfig {
            seed,
            ..cfg.train.clone()
        };
        let outcome = run_sdr_with(&split, &train, &cfg.penalty, cfg.search)?;
        row.d_hat = Some(outcome.d_hat);
        row.r = Some(vector_correlation(&beta_true, &outcome.beta_hat)?);
        row.mse_train = Some(mse(&outcome.model.predict(&split.x_train)?, &split.y_train)?);
        row.mse_val = Some(outcome.mse_table[&outcome.d_hat]);
        if let Some((x_test, y_test)) = &split.test {
            row.mse_test = Some(mse(&outcome.model.predict(x_test)?, y_test)?);
        }
        row.nnl_calls = Some(outcome.trace.nnl_invocations);
        Ok(outcome)
    })();
    row.wall_seconds = start.elapsed().as_secs_f64();
    let outcome = match result {
        Ok(o) => Some(o),
        Err(e) => {
            log::warn!("cell {cell_index} rep {rep} failed: {e}");
            row.status = format!("error: {e}");
            None
        }
    };
    Replication {
        cell: cell_index,
        row,
        outcome,
    }
}

/// Runs every cell × replication on a pool of `cfg.parallelism` threads.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<Replication>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .cells
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.replications).map(move |r| (i, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, rep)| run_replication(cfg, cell, rep))
            .collect()
    }))
}

pub fn write_rows<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Per-cell mean ± standard error of `r` and test MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: usize,
    pub model: u8,
    pub n: usize,
    pub p: usize,
    pub noise: f64,
    pub completed: usize,
    pub r: Option<(f64, f64)>,
    pub mse_test: Option<(f64, f64)>,
    pub d_hat: Vec<usize>,
}

pub fn summarize(cfg: &BenchConfig, reps: &[Replication]) -> Vec<CellSummary> {
    cfg.cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let rows: Vec<&BenchRow> = reps.iter().filter(|r| r.cell == i).map(|r| &r.row).collect();
            let collect = |f: fn(&BenchRow) -> Option<f64>| -> Vec<f64> { rows.iter().filter_map(|r| f(r)).collect() };
            let mean_se = |v: Vec<f64>| match v.len() {
                0 => None,
                1 => Some((v[0], f64::NAN)),
                _ => aggregate(&v).ok(),
            };
            CellSummary {
                cell: i,
                model: c.model,
                n: c.n_train_val,
                p: c.p,
                noise: rows.first().map_or(0.0, |r| r.noise),
                completed: rows.iter().filter(|r| r.status == "ok").count(),
                r: mean_se(collect(|r| r.r)),
                mse_test: mean_se(collect(|r| r.mse_test)),
                d_hat: rows.iter().filter_map(|r| r.d_hat).collect(),
            }
        })
        .collect()
}

pub fn format_summary(summaries: &[CellSummary]) -> String {
    let fmt = |v: Option<(f64, f64)>| match v {
        Some((m, se)) => format!("{m:.4} ± {se:.4}"),
        None => "-".into(),
    };
    let mut out = String::from("cell  model  n      p    noise   done  r                  mse_test           d_hat\n");
    for s in summaries {
        out.push_str(&format!(
            "{:<5} {:<6} {:<6} {:<4} {:<7} {:<5} {:<18} {:<18} {:?}\n",
            s.cell,
            s.model,
            s.n,
            s.p,
            s.noise,
            s.completed,
            fmt(s.r),
            fmt(s.mse_test),
            s.d_hat
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_with_defaults() {
        let text = r#"
            base_seed = 5
            [[cells]]
            model = 4
            n_train_val = 200
            p = 6
            [train]
            epochs = 10
            [penalty]
            override = 0.5
        "#;
        let cfg: BenchConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.cells[0].val_frac, 0.2);
        assert_eq!(cfg.cells[0].n_test, 1000);
        assert_eq!(cfg.cells[0].replications, 10);
        assert_eq!(cfg.train.epochs, 10);
        assert_eq!(cfg.train.m, 20);
        assert_eq!(cfg.penalty.override_value, Some(0.5));
        assert_eq!(cfg.parallelism, 1);
    }

    #[test]
    fn rejects_bad_cells() {
        let cell = CellSpec {
            model: 4,
            n_train_val: 100,
            val_frac: 0.2,
            n_test: 10,
            p: 6,
            noise: None,
            replications: 0,
        };
        let mut cfg = BenchConfig {
            cells: vec![cell.clone()],
            train: TrainConfig::default(),
            penalty: PenaltyConfig::default(),
            search: SearchOptions::default(),
            base_seed: 0,
            parallelism: 1,
        };
        assert!(cfg.validate().is_err());
        cfg.cells[0] = CellSpec { replications: 1, model: 9, ..cell.clone() };
        assert!(cfg.validate().is_err());
        cfg.cells[0] = CellSpec { replications: 1, val_frac: 1.0, ..cell };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn replication_seeds() {
        let cfg: BenchConfig = toml::from_str("base_seed = 7\n[[cells]]\nmodel = 4\nn_train_val = 50\np = 5\n").unwrap();
        assert_eq!(cfg.replication_seed(0), 7);
        assert_eq!(cfg.replication_seed(2), 7 + 2 * 0x9E37_79B9);
    }

    #[test]
    fn header_matches_row_fields() {
        let row = BenchRow {
            model: 4,
            n: 10,
            p: 5,
            noise: 0.1,
            rep: 0,
            d_hat: None,
            r: None,
            mse_train: None,
            mse_val: None,
            mse_test: None,
            nnl_calls: None,
            wall_seconds: 0.5,
            seed: 1,
            status: "error: x".into(),
        };
        let mut buf = Vec::new();
        write_rows(&mut buf, std::slice::from_ref(&row)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "4,10,5,0.1,0,,,,,,,0.5,1,error: x");
        assert_eq!(read_rows(&buf[..]).unwrap(), vec![row]);
    }
}
