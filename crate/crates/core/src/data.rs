//! Train / validation / test splits and the per-feature standardization
//! recorded from the training rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::SplitMix64;

/// Affine transform mapping raw coordinates to the scale the network sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub y_mean: f64,
    pub y_scale: f64,
}

impl Standardization {
    pub fn identity(p: usize) -> Self {
        Self {
            means: vec![0.0; p],
            scales: vec![1.0; p],
            y_mean: 0.0,
            y_scale: 1.0,
        }
    }

    /// Column means and population standard deviations. Constant columns get
    /// scale 1.
    pub fn fit(x: &Matrix, y: &[f64]) -> Self {
        let (n, p) = x.shape();
        let nf = n as f64;
        let mut means = vec![0.0; p];
        for i in 0..n {
            for (m, v) in means.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= nf);
        let mut vars = vec![0.0; p];
        for i in 0..n {
            for ((s, v), m) in vars.iter_mut().zip(x.row(i)).zip(&means) {
                *s += (v - m).powi(2);
            }
        }
        let scales = vars.iter().map(|s| positive_scale((s / nf).sqrt())).collect();
        let y_mean = y.iter().sum::<f64>() / nf;
        let y_var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / nf;
        Self {
            means,
            scales,
            y_mean,
            y_scale: positive_scale(y_var.sqrt()),
        }
    }

    pub fn p(&self) -> usize {
        self.means.len()
    }

    pub fn transform_x(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            self.transform_row(out.row_mut(i));
        }
        out
    }

    pub fn transform_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.means).zip(&self.scales) {
            *v = (*v - m) / s;
        }
    }

    pub fn transform_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| (v - self.y_mean) / self.y_scale).collect()
    }

    pub fn restore_y(&self, y: f64) -> f64 {
        self.y_mean + self.y_scale * y
    }
}

fn positive_scale(s: f64) -> f64 {
    if s > 1e-12 && s.is_finite() {
        s
    } else {
        1.0
    }
}

/// Training, validation and optional test data sharing one predictor
/// dimension.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub x_train: Matrix,
    pub y_train: Vec<f64>,
    pub x_val: Matrix,
    pub y_val: Vec<f64>,
    pub test: Option<(Matrix, Vec<f64>)>,
    pub standardization: Standardization,
}

impl DataSplit {
    pub fn new(x_train: Matrix, y_train: Vec<f64>, x_val: Matrix, y_val: Vec<f64>) -> Result<Self> {
        check_pair("train", &x_train, &y_train)?;
        check_pair("validation", &x_val, &y_val)?;
        if x_train.rows() == 0 || x_val.rows() == 0 {
            return Err(Error::invalid(
                "training and validation sets must be nonempty",
            ));
        }
        if x_train.cols() != x_val.cols() {
            return Err(Error::dims(format!(
                "train has p={} but validation has p={}",
                x_train.cols(),
                x_val.cols()
            )));
        }
        let (n, n_va) = (x_train.rows() as f64, x_val.rows() as f64);
        if n_va < 0.1 * n || n_va > 0.3 * n {
            log::warn!(
                "validation size {n_va} outside the usual range [0.1N, 0.3N] for N = {n}"
            );
        }
        let standardization = Standardization::fit(&x_train, &y_train);
        Ok(Self {
            x_train,
            y_train,
            x_val,
            y_val,
            test: None,
            standardization,
        })
    }

    pub fn with_test(mut self, x_test: Matrix, y_test: Vec<f64>) -> Result<Self> {
        check_pair("test", &x_test, &y_test)?;
        if x_test.cols() != self.p() {
            return Err(Error::dims(format!(
                "test has p={} but train has p={}",
                x_test.cols(),
                self.p()
            )));
        }
        self.test = Some((x_test, y_test));
        Ok(self)
    }

    /// Splits rows by a seeded permutation: the first `round(val_frac·n)`
    /// shuffled rows become validation data, the rest training data.
    pub fn shuffled(x: &Matrix, y: &[f64], val_frac: f64, seed: u64) -> Result<Self> {
        check_pair("data", x, y)?;
        if !(val_frac > 0.0 && val_frac < 1.0) {
            return Err(Error::invalid(format!(
                "validation fraction {val_frac} not in (0, 1)"
            )));
        }
        let n = x.rows();
        let n_va = ((n as f64) * val_frac).round() as usize;
        if n_va == 0 || n_va >= n {
            return Err(Error::invalid(format!(
                "{n} rows cannot be split with validation fraction {val_frac}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        SplitMix64::new(seed).shuffle(&mut order);
        let (val_idx, train_idx) = order.split_at(n_va);
        let pick = |idx: &[usize]| idx.iter().map(|&i| y[i]).collect::<Vec<_>>();
        Self::new(
            x.select_rows(train_idx),
            pick(train_idx),
            x.select_rows(val_idx),
            pick(val_idx),
        )
    }

    pub fn p(&self) -> usize {
        self.x_train.cols()
    }

    pub fn n_train(&self) -> usize {
        self.x_train.rows()
    }

    pub fn n_val(&self) -> usize {
        self.x_val.rows()
    }

    /// Network-scale copies of the training and validation sets.
    pub(crate) fn prepare(&self, standardize: bool) -> Prepared {
        let standardization = if standardize {
            self.standardization.clone()
        } else {
            Standardization::identity(self.p())
        };
        Prepared {
            x_train: standardization.transform_x(&self.x_train),
            y_train: standardization.transform_y(&self.y_train),
            x_val: standardization.transform_x(&self.x_val),
            y_val: standardization.transform_y(&self.y_val),
            standardization,
        }
    }
}

fn check_pair(name: &str, x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::dims(format!(
            "{name} set has {} rows but {} responses",
            x.rows(),
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("{name} response {i} is not finite")));
    }
    Ok(())
}

/// Standardized training data, shared across restarts and dimensions.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub x_train: Matrix,
    pub y_train: Vec<f64>,
    pub x_val: Matrix,
    pub y_val: Vec<f64>,
    pub standardization: Standardization,
}

impl Prepared {
    pub fn p(&self) -> usize {
        self.x_train.cols()
    }
}
