//! The two-hidden-layer regression network
//!
//! ```text
//! f(x) = tau0 + sum_i tau_i * phi(u_i . (w^T x) + v_i)
//! ```
//!
//! The first layer is linear and bias-free, so its `p×k` weight matrix `w`
//! spans the estimated central space. The second layer has `m` sigmoidal
//! units and the output is linear.

pub(crate) mod train;

use serde::{Deserialize, Serialize};

use crate::data::Standardization;
use crate::error::{Error, Result};
use crate::linalg::{gemm, Matrix, Op};

pub use train::{nnl, train_once, NnlResult, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Logistic,
}

impl Activation {
    /// `tanh` goes through a single `exp`, which is several times faster than
    /// the libm routine and within a few ulp of it.
    #[inline]
    pub fn apply(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - 2.0 / ((2.0 * a).exp() + 1.0),
            Activation::Logistic => 1.0 / (1.0 + (-a).exp()),
        }
    }

    /// Derivative expressed through the activation value `h = phi(a)`.
    #[inline]
    fn slope_from_value(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Logistic => h * (1.0 - h),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            other => Err(Error::invalid(format!("unknown activation '{other}'"))),
        }
    }
}

/// All weights of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub activation: Activation,
    /// First layer, `p×k`.
    pub w: Matrix,
    /// Second layer, `k×m`; column `i` is `u_i`.
    pub u: Matrix,
    pub v: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau0: f64,
}

impl NetworkParams {
    pub fn zeros(p: usize, k: usize, m: usize, activation: Activation) -> Self {
        Self {
            activation,
            w: Matrix::zeros(p, k),
            u: Matrix::zeros(k, m),
            v: vec![0.0; m],
            tau: vec![0.0; m],
            tau0: 0.0,
        }
    }

    pub fn p(&self) -> usize {
        self.w.rows()
    }

    pub fn k(&self) -> usize {
        self.w.cols()
    }

    pub fn m(&self) -> usize {
        self.u.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let (k, m) = (self.k(), self.m());
        if self.u.rows() != k || self.v.len() != m || self.tau.len() != m {
            return Err(Error::dims(format!(
                "inconsistent network: w {:?}, u {:?}, |v| {}, |tau| {}",
                self.w.shape(),
                self.u.shape(),
                self.v.len(),
                self.tau.len()
            )));
        }
        let finite = self.w.as_slice().iter().chain(self.u.as_slice()).chain(&self.v).chain(&self.tau).all(|x| x.is_finite());
        if !finite || !self.tau0.is_finite() {
            return Err(Error::invalid("network parameters must be finite"));
        }
        Ok(())
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(self.p(), self.k(), self.m())
    }

    /// Parameters as one vector: `w`, `u` (both row-major), `v`, `tau`, `tau0`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.layout().len());
        flat.extend_from_slice(self.w.as_slice());
        flat.extend_from_slice(self.u.as_slice());
        flat.extend_from_slice(&self.v);
        flat.extend_from_slice(&self.tau);
        flat.push(self.tau0);
        flat
    }

    pub fn from_flat(p: usize, k: usize, m: usize, activation: Activation, flat: &[f64]) -> Result<Self> {
        let layout = Layout::new(p, k, m);
        if flat.len() != layout.len() {
            return Err(Error::dims(format!(
                "{} parameters for a network needing {}",
                flat.len(),
                layout.len()
            )));
        }
        Ok(Self {
            activation,
            w: Matrix::new(p, k, layout.w(flat).to_vec())?,
            u: Matrix::new(k, m, layout.u(flat).to_vec())?,
            v: layout.v(flat).to_vec(),
            tau: layout.tau(flat).to_vec(),
            tau0: flat[layout.tau0],
        })
    }

    /// Multiply-adds for one forward evaluation: `pk + km + m`.
    pub fn forward_cost(&self) -> usize {
        let (p, k, m) = (self.p(), self.k(), self.m());
        p * k + k * m + m
    }
}

/// Offsets of each parameter block inside the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub p: usize,
    pub k: usize,
    pub m: usize,
    u: usize,
    v: usize,
    tau: usize,
    pub tau0: usize,
}

impl Layout {
    pub fn new(p: usize, k: usize, m: usize) -> Self {
        let u = p * k;
        let v = u + k * m;
        let tau = v + m;
        let tau0 = tau + m;
        Self { p, k, m, u, v, tau, tau0 }
    }

    pub fn len(&self) -> usize {
        self.tau0 + 1
    }

    pub fn w<'a>(&self, flat: &'a [f64]) -> &'a [f64] {
        &flat[..self.u]
    }

    pub fn u<'a>(&self, flat: &'a [f64]) -> &'a [f64] {
        &flat[self.u..self.v]
    }

    pub fn v<'a>(&self, flat: &'a [f64]) -> &'a [f64] {
        &flat[self.v..self.tau]
    }

    pub fn tau<'a>(&self, flat: &'a [f64]) -> &'a [f64] {
        &flat[self.tau..self.tau0]
    }

    /// Mutable views of the `w`, `u`, `v`, `tau` blocks and `tau0`.
    fn split_mut<'a>(&self, flat: &'a mut [f64]) -> (&'a mut [f64], &'a mut [f64], &'a mut [f64], &'a mut [f64], &'a mut f64) {
        let (w, rest) = flat.split_at_mut(self.u);
        let (u, rest) = rest.split_at_mut(self.k * self.m);
        let (v, rest) = rest.split_at_mut(self.m);
        let (tau, rest) = rest.split_at_mut(self.m);
        (w, u, v, tau, &mut rest[0])
    }
}

/// Scratch buffers for batched evaluation on `n` rows.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    n: usize,
    hidden1: Vec<f64>,
    hidden2: Vec<f64>,
    out: Vec<f64>,
    delta2: Vec<f64>,
    delta1: Vec<f64>,
}

impl Workspace {
    pub fn new(n: usize, layout: Layout) -> Self {
        Self {
            n,
            hidden1: vec![0.0; n * layout.k],
            hidden2: vec![0.0; n * layout.m],
            out: vec![0.0; n],
            delta2: vec![0.0; n * layout.m],
            delta1: vec![0.0; n * layout.k],
        }
    }

    /// Network outputs for every row of `x` (row-major, `n×p`).
    pub fn forward(&mut self, layout: Layout, act: Activation, flat: &[f64], x: &[f64]) -> &[f64] {
        let Layout { p, k, m, .. } = layout;
        let n = self.n;
        gemm(n, p, k, Op::N(x), Op::N(layout.w(flat)), &mut self.hidden1, 0.0);
        gemm(n, k, m, Op::N(&self.hidden1), Op::N(layout.u(flat)), &mut self.hidden2, 0.0);
        let v = layout.v(flat);
        let tau = layout.tau(flat);
        let tau0 = flat[layout.tau0];
        for (row, out) in self.hidden2.chunks_exact_mut(m).zip(self.out.iter_mut()) {
            let mut acc = tau0;
            for ((h, &b), &t) in row.iter_mut().zip(v).zip(tau) {
                *h = act.apply(*h + b);
                acc += t * *h;
            }
            *out = acc;
        }
        &self.out
    }

    /// Mean squared error against `y`, writing the gradient of the MSE
    /// (no penalty) into `grad`.
    pub fn mse_and_gradient(
        &mut self,
        layout: Layout,
        act: Activation,
        flat: &[f64],
        x: &[f64],
        y: &[f64],
        grad: &mut [f64],
    ) -> f64 {
        let Layout { p, k, m, .. } = layout;
        let n = self.n;
        self.forward(layout, act, flat, x);
        let scale = 2.0 / n as f64;
        let mut sse = 0.0;
        let tau = layout.tau(flat);
        let (g_w, g_u, g_v, g_tau, g_tau0) = layout.split_mut(grad);
        g_v.fill(0.0);
        g_tau.fill(0.0);
        *g_tau0 = 0.0;
        for i in 0..n {
            let resid = self.out[i] - y[i];
            sse += resid * resid;
            let r = scale * resid;
            *g_tau0 += r;
            let h = &self.hidden2[i * m..(i + 1) * m];
            let d = &mut self.delta2[i * m..(i + 1) * m];
            for j in 0..m {
                g_tau[j] += r * h[j];
                d[j] = r * tau[j] * act.slope_from_value(h[j]);
                g_v[j] += d[j];
            }
        }
        gemm(k, n, m, Op::T(&self.hidden1), Op::N(&self.delta2), g_u, 0.0);
        gemm(n, m, k, Op::N(&self.delta2), Op::T(layout.u(flat)), &mut self.delta1, 0.0);
        gemm(p, n, k, Op::T(x), Op::N(&self.delta1), g_w, 0.0);
        sse / n as f64
    }
}

/// Network output at a single input.
pub fn forward(params: &NetworkParams, x: &[f64]) -> Result<f64> {
    params.validate()?;
    if x.len() != params.p() {
        return Err(Error::dims(format!(
            "input has length {}, network expects {}",
            x.len(),
            params.p()
        )));
    }
    let layout = params.layout();
    let mut ws = Workspace::new(1, layout);
    Ok(ws.forward(layout, params.activation, &params.to_flat(), x)[0])
}

/// Outputs for every row of `x`.
pub fn forward_batch(params: &NetworkParams, x: &Matrix) -> Result<Vec<f64>> {
    params.validate()?;
    if x.cols() != params.p() {
        return Err(Error::dims(format!(
            "inputs have p={}, network expects {}",
            x.cols(),
            params.p()
        )));
    }
    let layout = params.layout();
    let mut ws = Workspace::new(x.rows(), layout);
    Ok(ws.forward(layout, params.activation, &params.to_flat(), x.as_slice()).to_vec())
}

/// Penalized training loss `MSE + lambda·‖params‖₁` and its (sub)gradient.
///
/// The L1 norm covers every parameter including `tau0`; the subgradient uses
/// `sign(0) = 0`.
pub fn loss_and_gradient(
    params: &NetworkParams,
    x: &Matrix,
    y: &[f64],
    lambda: f64,
) -> Result<(f64, NetworkParams)> {
    params.validate()?;
    if x.rows() == 0 {
        return Err(Error::invalid("empty batch"));
    }
    if x.rows() != y.len() || x.cols() != params.p() {
        return Err(Error::dims(format!(
            "batch {:?} with {} responses for a network with p={}",
            x.shape(),
            y.len(),
            params.p()
        )));
    }
    let layout = params.layout();
    let flat = params.to_flat();
    let mut grad = vec![0.0; flat.len()];
    let mut ws = Workspace::new(x.rows(), layout);
    let mse = ws.mse_and_gradient(layout, params.activation, &flat, x.as_slice(), y, &mut grad);
    let mut l1 = 0.0;
    for (g, &w) in grad.iter_mut().zip(&flat) {
        l1 += w.abs();
        *g += lambda * sign(w);
    }
    let grads = NetworkParams::from_flat(layout.p, layout.k, layout.m, params.activation, &grad)?;
    Ok((mse + lambda * l1, grads))
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A trained network together with the standardization of its inputs and
/// response.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub params: NetworkParams,
    pub standardization: Standardization,
}

impl FittedModel {
    pub fn p(&self) -> usize {
        self.params.p()
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let xs = self.standardization.transform_x(x);
        let out = forward_batch(&self.params, &xs)?;
        Ok(out.into_iter().map(|v| self.standardization.restore_y(v)).collect())
    }

    /// First-layer weights in original predictor coordinates.
    pub fn beta_hat(&self) -> Matrix {
        let mut w = self.params.w.clone();
        for (j, s) in self.standardization.scales.iter().enumerate() {
            w.row_mut(j).iter_mut().for_each(|v| *v /= s);
        }
        w
    }

    /// Equivalent network acting directly on raw inputs: the input shift is
    /// absorbed into the second-layer biases and the response transform into
    /// the output layer.
    pub fn folded(&self) -> NetworkParams {
        let st = &self.standardization;
        let w = self.beta_hat();
        let (p, k) = w.shape();
        let mut shift = vec![0.0; k];
        for j in 0..p {
            for (c, s) in shift.iter_mut().enumerate() {
                *s += w[(j, c)] * st.means[j];
            }
        }
        let u = &self.params.u;
        let v = self
            .params
            .v
            .iter()
            .enumerate()
            .map(|(i, &vi)| vi - (0..k).map(|c| u[(c, i)] * shift[c]).sum::<f64>())
            .collect();
        NetworkParams {
            activation: self.params.activation,
            w,
            u: u.clone(),
            v,
            tau: self.params.tau.iter().map(|t| t * st.y_scale).collect(),
            tau0: st.restore_y(self.params.tau0),
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            p: self.p(),
            k: self.k(),
            m: self.params.m(),
            activation: self.params.activation,
            standardization: self.standardization.clone(),
            w: self.params.w.as_slice().to_vec(),
            u: self.params.u.as_slice().to_vec(),
            v: self.params.v.clone(),
            tau: self.params.tau.clone(),
            tau0: self.params.tau0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelDocument>(s)?.try_into()
    }
}

/// Serialized form of a [`FittedModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub p: usize,
    pub k: usize,
    pub m: usize,
    pub activation: Activation,
    pub standardization: Standardization,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau0: f64,
}

impl TryFrom<ModelDocument> for FittedModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let params = NetworkParams {
            activation: doc.activation,
            w: Matrix::new(doc.p, doc.k, doc.w)?,
            u: Matrix::new(doc.k, doc.m, doc.u)?,
            v: doc.v,
            tau: doc.tau,
            tau0: doc.tau0,
        };
        params.validate()?;
        let st = &doc.standardization;
        if st.means.len() != doc.p || st.scales.len() != doc.p {
            return Err(Error::dims("standardization length differs from p"));
        }
        Ok(Self {
            params,
            standardization: doc.standardization,
        })
    }
}
