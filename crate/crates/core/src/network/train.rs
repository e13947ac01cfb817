use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Activation, FittedModel, Layout, NetworkParams, Workspace};
use crate::data::{DataSplit, Prepared};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Width of the second hidden layer.
    pub m: usize,
    /// Independent restarts per dimension.
    pub restarts: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub activation: Activation,
    pub standardize: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            m: 20,
            restarts: 3,
            lambda: 1e-3,
            learning_rate: 0.01,
            epochs: 2000,
            activation: Activation::Tanh,
            standardize: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("second-layer width must be at least 1"));
        }
        if self.epochs == 0 || self.restarts == 0 {
            return Err(Error::invalid("epochs and restarts must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda must be nonnegative"));
        }
        Ok(())
    }

    /// Seed of restart `index`.
    pub fn restart_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, index as u64)
    }
}

/// Best of several restarts at one first-layer width.
#[derive(Debug, Clone)]
pub struct NnlResult {
    pub model: FittedModel,
    /// Validation MSE of `model`, in original response units.
    pub mse_va: f64,
    /// One entry per restart; diverged restarts hold `+inf`.
    pub per_restart_mse: Vec<f64>,
    pub best_restart: usize,
    pub diverged_restarts: usize,
}

fn check_width(k: usize, p: usize) -> Result<()> {
    if k == 0 || k > p {
        return Err(Error::invalid(format!(
            "first-layer width {k} outside 1..={p}"
        )));
    }
    Ok(())
}

/// Trains one network at first-layer width `k` and returns the parameter
/// snapshot with the lowest validation MSE seen (including the initial one)
/// together with that MSE in original units.
pub fn train_once(
    data: &DataSplit,
    k: usize,
    cfg: &TrainConfig,
    restart_seed: u64,
) -> Result<(FittedModel, f64)> {
    cfg.validate()?;
    check_width(k, data.p())?;
    let prepared = data.prepare(cfg.standardize);
    train_prepared(&prepared, k, cfg, restart_seed)
}

pub(crate) fn train_prepared(
    data: &Prepared,
    k: usize,
    cfg: &TrainConfig,
    restart_seed: u64,
) -> Result<(FittedModel, f64)> {
    let p = data.p();
    let layout = Layout::new(p, k, cfg.m);
    let act = cfg.activation;
    let mut theta = initial_parameters(layout, restart_seed);

    let x = data.x_train.as_slice();
    let x_val = data.x_val.as_slice();
    let mut ws = Workspace::new(data.x_train.rows(), layout);
    let mut ws_val = Workspace::new(data.x_val.rows(), layout);

    let val_mse = |ws_val: &mut Workspace, theta: &[f64]| {
        let out = ws_val.forward(layout, act, theta, x_val);
        out.iter().zip(&data.y_val).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / out.len() as f64
    };

    let mut best = theta.clone();
    let mut best_mse = val_mse(&mut ws_val, &theta);

    let mut grad = vec![0.0; layout.len()];
    let mut first_moment = vec![0.0; layout.len()];
    let mut second_moment = vec![0.0; layout.len()];
    let shrink = cfg.learning_rate * cfg.lambda;
    let (mut decay1, mut decay2) = (1.0, 1.0);

    for epoch in 1..=cfg.epochs {
        let mse = ws.mse_and_gradient(layout, act, &theta, x, &data.y_train, &mut grad);
        if !mse.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        decay1 *= BETA1;
        decay2 *= BETA2;
        let step = cfg.learning_rate / (1.0 - decay1);
        let bias2 = 1.0 - decay2;
        for (((t, g), m1), m2) in theta.iter_mut().zip(&grad).zip(&mut first_moment).zip(&mut second_moment) {
            *m1 = BETA1 * *m1 + (1.0 - BETA1) * g;
            *m2 = BETA2 * *m2 + (1.0 - BETA2) * g * g;
            *t -= step * *m1 / ((*m2 / bias2).sqrt() + ADAM_EPS);
        }
        if shrink > 0.0 {
            // Proximal step for the L1 penalty; the output intercept is left alone.
            for t in &mut theta[..layout.tau0] {
                *t = t.signum() * (t.abs() - shrink).max(0.0);
            }
        }

        let current = val_mse(&mut ws_val, &theta);
        if !current.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        if current < best_mse {
            best_mse = current;
            best.copy_from_slice(&theta);
        }
    }

    let params = NetworkParams::from_flat(p, k, cfg.m, act, &best)?;
    let y_scale = data.standardization.y_scale;
    Ok((
        FittedModel {
            params,
            standardization: data.standardization.clone(),
        },
        best_mse * y_scale * y_scale,
    ))
}

/// Glorot-uniform weights, zero biases.
fn initial_parameters(layout: Layout, seed: u64) -> Vec<f64> {
    let Layout { p, k, m, .. } = layout;
    let mut rng = SplitMix64::new(seed);
    let mut theta = Vec::with_capacity(layout.len());
    let mut block = |count: usize, fan_in: usize, fan_out: usize, theta: &mut Vec<f64>| {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        theta.extend((0..count).map(|_| rng.uniform(-limit, limit)));
    };
    block(p * k, p, k, &mut theta);
    block(k * m, k, m, &mut theta);
    theta.extend(std::iter::repeat_n(0.0, m));
    block(m, m, 1, &mut theta);
    theta.push(0.0);
    debug_assert_eq!(theta.len(), layout.len());
    theta
}

/// Trains `cfg.restarts` networks at width `k` and keeps the one with the
/// lowest validation MSE (ties go to the earlier restart).
pub fn nnl(data: &DataSplit, k: usize, cfg: &TrainConfig) -> Result<NnlResult> {
    cfg.validate()?;
    check_width(k, data.p())?;
    let prepared = data.prepare(cfg.standardize);
    nnl_prepared(&prepared, k, cfg)
}

pub(crate) fn nnl_prepared(data: &Prepared, k: usize, cfg: &TrainConfig) -> Result<NnlResult> {
    let runs: Vec<Result<(FittedModel, f64)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|j| train_prepared(data, k, cfg, cfg.restart_seed(j)))
        .collect();

    let mut per_restart_mse = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, FittedModel, f64)> = None;
    let mut last_error = None;
    for (j, run) in runs.into_iter().enumerate() {
        match run {
            Ok((model, mse)) => {
                per_restart_mse.push(mse);
                if best.as_ref().is_none_or(|b| mse < b.2) {
                    best = Some((j, model, mse));
                }
            }
            Err(e) => {
                log::warn!("restart {j} at k={k} failed: {e}");
                per_restart_mse.push(f64::INFINITY);
                last_error = Some(e);
            }
        }
    }
    let diverged_restarts = per_restart_mse.iter().filter(|v| v.is_infinite()).count();
    match best {
        Some((best_restart, model, mse_va)) => Ok(NnlResult {
            model,
            mse_va,
            per_restart_mse,
            best_restart,
            diverged_restarts,
        }),
        None => Err(last_error.expect("at least one restart")),
    }
}
