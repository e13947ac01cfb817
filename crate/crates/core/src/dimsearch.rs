//! Structural-dimension search.
//!
//! Given validation errors `S(k)` of networks with first-layer width `k`, the
//! search first brackets the dimension with golden-ratio probes on `[1, p]`
//! and then walks down from the right end of the bracket while dropping one
//! dimension costs at most `pen` in validation error. Each width is trained at
//! most once per run; repeated requests are served from a memo table.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::DataSplit;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::mse;
use crate::network::train::nnl_prepared;
use crate::network::{FittedModel, ModelDocument, NnlResult, TrainConfig};

/// Penalty per retained dimension:
/// `scale · ((ln N / N)^{1/2} + n_va^{-1/2}) · ln(ln N)`, or a fixed override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyConfig {
    pub scale: f64,
    #[serde(rename = "override")]
    pub override_value: Option<f64>,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            scale: 0.1,
            override_value: None,
        }
    }
}

/// `n` is the training sample size and `n_va` the validation size.
pub fn penalty(n: usize, n_va: usize, cfg: &PenaltyConfig) -> Result<f64> {
    if let Some(c) = cfg.override_value {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("penalty override {c} must be >= 0")));
        }
        return Ok(c);
    }
    if n < 8 {
        return Err(Error::invalid(format!(
            "penalty needs N >= 8 training samples, got {n}"
        )));
    }
    if n_va == 0 {
        return Err(Error::invalid("penalty needs a nonempty validation set"));
    }
    if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
        return Err(Error::invalid(format!("penalty scale {} must be > 0", cfg.scale)));
    }
    let nf = n as f64;
    let rate = (nf.ln() / nf).sqrt() + 1.0 / (n_va as f64).sqrt();
    Ok(cfg.scale * rate * nf.ln().ln())
}

/// `CR(k) = mse_va + k·pen`.
pub fn criterion(mse_va: f64, k: usize, pen: f64) -> f64 {
    mse_va + k as f64 * pen
}

/// Interior probes of `[m0, n0]` at 0.382 and 0.618 of its length, rounded
/// down.
pub fn golden_points(m0: usize, n0: usize) -> (usize, usize) {
    let len = n0.saturating_sub(m0);
    (m0 + 382 * len / 1000, m0 + 618 * len / 1000)
}

/// Bound `⌈1.44(log₂p − 2)⌉ + 3` on fresh evaluations during bracketing;
/// 3 when `p < 5`.
pub fn call_budget(p: usize) -> usize {
    if p < 5 {
        return 3;
    }
    let s = (1.44 * ((p as f64).log2() - 2.0)).ceil() as usize;
    s + 3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Bracket,
    Refine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub k: usize,
    pub mse_va: f64,
    pub phase: Phase,
    pub reused_from_cache: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub m0: usize,
    pub n0: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    /// Every request for `S(k)`, in order.
    pub evaluations: Vec<Evaluation>,
    /// Bracket before the first iteration and after each one.
    pub brackets: Vec<Bracket>,
    /// Distinct widths trained.
    pub nnl_invocations: usize,
    /// Distinct widths trained during bracketing.
    pub bracket_invocations: usize,
}

impl SearchTrace {
    pub fn iterations(&self) -> usize {
        self.brackets.len().saturating_sub(1)
    }

    pub fn refine_invocations(&self) -> usize {
        self.nnl_invocations - self.bracket_invocations
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    /// Report `l + 1` at refinement exit instead of `l`.
    pub paper_literal_offset: bool,
}

/// Result of the search alone, independent of how `S(k)` is produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub d_hat: usize,
    pub trace: SearchTrace,
    pub mse_table: BTreeMap<usize, f64>,
}

struct Memo<F> {
    evaluate: F,
    table: BTreeMap<usize, f64>,
    trace: SearchTrace,
}

impl<F: FnMut(usize) -> Result<f64>> Memo<F> {
    fn get(&mut self, k: usize, phase: Phase) -> Result<f64> {
        let (value, reused) = match self.table.get(&k) {
            Some(&v) => (v, true),
            None => {
                let v = (self.evaluate)(k)?;
                self.table.insert(k, v);
                self.trace.nnl_invocations += 1;
                if phase == Phase::Bracket {
                    self.trace.bracket_invocations += 1;
                }
                (v, false)
            }
        };
        self.trace.evaluations.push(Evaluation {
            k,
            mse_va: value,
            phase,
            reused_from_cache: reused,
        });
        Ok(value)
    }
}

/// Runs the bracketing and refinement phases over widths `1..=p`, calling
/// `evaluate(k)` for the validation error at width `k`.
pub fn search_dimension<F>(p: usize, pen: f64, opts: SearchOptions, evaluate: F) -> Result<SearchResult>
where
    F: FnMut(usize) -> Result<f64>,
{
    if p == 0 {
        return Err(Error::invalid("dimension search needs p >= 1"));
    }
    let mut memo = Memo {
        evaluate,
        table: BTreeMap::new(),
        trace: SearchTrace::default(),
    };

    let (mut m0, mut n0) = (1, p);
    if n0 - m0 >= 4 {
        let (mut k1, mut k2) = golden_points(m0, n0);
        let mut s1 = memo.get(k1, Phase::Bracket)?;
        let mut s2 = memo.get(k2, Phase::Bracket)?;
        let mut s_n0 = memo.get(n0, Phase::Bracket)?;
        memo.trace.brackets.push(Bracket { m0, n0 });
        while n0 - m0 >= 4 {
            // Both gaps are measured against the bracket held at the start of
            // the iteration.
            let flat_right = s2 - s_n0 <= (n0 - k2) as f64 * pen;
            let flat_middle = s1 - s2 <= (k2 - k1) as f64 * pen;
            if flat_right && flat_middle {
                n0 = k2;
                s_n0 = s2;
                k2 = k1;
                s2 = s1;
                k1 = golden_points(m0, n0).0;
                s1 = memo.get(k1, Phase::Bracket)?;
            } else {
                m0 = k1;
                k1 = k2;
                s1 = s2;
                k2 = golden_points(m0, n0).1;
                s2 = memo.get(k2, Phase::Bracket)?;
            }
            // Flooring can leave the carried probe on the wrong side of the
            // fresh one, or on top of it or an endpoint.
            if k1 > k2 {
                std::mem::swap(&mut k1, &mut k2);
                std::mem::swap(&mut s1, &mut s2);
            }
            if n0 - m0 >= 4 && !(m0 < k1 && k1 < k2 && k2 < n0) {
                (k1, k2) = golden_points(m0, n0);
                s1 = memo.get(k1, Phase::Bracket)?;
                s2 = memo.get(k2, Phase::Bracket)?;
            }
            memo.trace.brackets.push(Bracket { m0, n0 });
        }
    }

    let mut l = n0;
    let mut s_l = memo.get(l, Phase::Refine)?;
    while l > 1 {
        let s_below = memo.get(l - 1, Phase::Refine)?;
        if s_below - s_l <= pen {
            l -= 1;
            s_l = s_below;
        } else {
            break;
        }
    }

    let d_hat = if opts.paper_literal_offset {
        let d = (l + 1).min(p);
        memo.get(d, Phase::Refine)?;
        d
    } else {
        l
    };
    Ok(SearchResult {
        d_hat,
        trace: memo.trace,
        mse_table: memo.table,
    })
}

/// Estimated dimension, basis and model.
#[derive(Debug, Clone)]
pub struct SdrOutcome {
    pub d_hat: usize,
    /// `p×d_hat` first-layer weights of the selected model in original
    /// predictor coordinates.
    pub beta_hat: Matrix,
    pub model: FittedModel,
    pub trace: SearchTrace,
    pub pen: f64,
    /// Validation MSE per evaluated width.
    pub mse_table: BTreeMap<usize, f64>,
    /// Training MSE per evaluated width.
    pub mse_train_table: BTreeMap<usize, f64>,
    /// Test MSE per evaluated width, when the split carries test data.
    pub mse_test_table: BTreeMap<usize, f64>,
}

/// Full pipeline: train networks at the widths the search asks for and
/// return the selected one.
pub fn run_sdr(data: &DataSplit, cfg: &TrainConfig, pcfg: &PenaltyConfig) -> Result<SdrOutcome> {
    run_sdr_with(data, cfg, pcfg, SearchOptions::default())
}

pub fn run_sdr_with(
    data: &DataSplit,
    cfg: &TrainConfig,
    pcfg: &PenaltyConfig,
    opts: SearchOptions,
) -> Result<SdrOutcome> {
    cfg.validate()?;
    let p = data.p();
    let pen = penalty(data.n_train(), data.n_val(), pcfg)?;
    let prepared = data.prepare(cfg.standardize);
    let mut fits: HashMap<usize, NnlResult> = HashMap::new();

    let search = search_dimension(p, pen, opts, |k| {
        let fit = nnl_prepared(&prepared, k, cfg)?;
        log::info!("k = {k}: validation mse {:.6}", fit.mse_va);
        let mse_va = fit.mse_va;
        fits.insert(k, fit);
        Ok(mse_va)
    })?;

    let mut mse_train_table = BTreeMap::new();
    let mut mse_test_table = BTreeMap::new();
    for (&k, fit) in &fits {
        mse_train_table.insert(k, mse(&fit.model.predict(&data.x_train)?, &data.y_train)?);
        if let Some((x_test, y_test)) = &data.test {
            mse_test_table.insert(k, mse(&fit.model.predict(x_test)?, y_test)?);
        }
    }

    let model = fits
        .remove(&search.d_hat)
        .expect("selected width was evaluated")
        .model;
    Ok(SdrOutcome {
        d_hat: search.d_hat,
        beta_hat: model.beta_hat(),
        model,
        trace: search.trace,
        pen,
        mse_table: search.mse_table,
        mse_train_table,
        mse_test_table,
    })
}

/// JSON form of [`SdrOutcome`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeDocument {
    pub d_hat: usize,
    pub p: usize,
    pub pen: f64,
    pub beta_hat: MatrixDocument,
    pub mse_table: BTreeMap<usize, f64>,
    #[serde(default)]
    pub mse_train_table: BTreeMap<usize, f64>,
    #[serde(default)]
    pub mse_test_table: BTreeMap<usize, f64>,
    pub trace: SearchTrace,
    pub model: ModelDocument,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
}

impl From<&Matrix> for MatrixDocument {
    fn from(m: &Matrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }
}

impl TryFrom<MatrixDocument> for Matrix {
    type Error = Error;

    fn try_from(doc: MatrixDocument) -> Result<Self> {
        Matrix::new(doc.rows, doc.cols, doc.data)
    }
}

impl SdrOutcome {
    pub fn to_document(&self) -> OutcomeDocument {
        OutcomeDocument {
            d_hat: self.d_hat,
            p: self.beta_hat.rows(),
            pen: self.pen,
            beta_hat: (&self.beta_hat).into(),
            mse_table: self.mse_table.clone(),
            mse_train_table: self.mse_train_table.clone(),
            mse_test_table: self.mse_test_table.clone(),
            trace: self.trace.clone(),
            model: self.model.to_document(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: OutcomeDocument = serde_json::from_str(s)?;
        let beta_hat = Matrix::try_from(doc.beta_hat)?;
        if beta_hat.cols() != doc.d_hat || beta_hat.rows() != doc.p {
            return Err(Error::Data(format!(
                "beta_hat shape {:?} disagrees with p={} d_hat={}",
                beta_hat.shape(),
                doc.p,
                doc.d_hat
            )));
        }
        Ok(Self {
            d_hat: doc.d_hat,
            beta_hat,
            model: doc.model.try_into()?,
            trace: doc.trace,
            pen: doc.pen,
            mse_table: doc.mse_table,
            mse_train_table: doc.mse_train_table,
            mse_test_table: doc.mse_test_table,
        })
    }
}
