#![allow(dead_code)]

use grnn_sdr::linalg::Matrix;
use grnn_sdr::network::{loss_and_gradient, Activation, NetworkParams};
use grnn_sdr::rng::SplitMix64;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-5;
pub const L1_THRESHOLD: f64 = 1e-3;

/// Loss evaluated straight from the network formula, without the library's
/// batched forward pass.
pub fn reference_loss(params: &NetworkParams, x: &Matrix, y: &[f64], lambda: f64) -> f64 {
    let (p, k, m) = (params.p(), params.k(), params.m());
    let act = |a: f64| match params.activation {
        Activation::Tanh => a.tanh(),
        Activation::Logistic => 1.0 / (1.0 + (-a).exp()),
    };
    let mut sse = 0.0;
    for i in 0..x.rows() {
        let xi = x.row(i);
        let z: Vec<f64> = (0..k).map(|c| (0..p).map(|r| params.w[(r, c)] * xi[r]).sum()).collect();
        let mut f = params.tau0;
        for j in 0..m {
            let a: f64 = (0..k).map(|c| params.u[(c, j)] * z[c]).sum::<f64>() + params.v[j];
            f += params.tau[j] * act(a);
        }
        sse += (f - y[i]).powi(2);
    }
    let l1: f64 = params.to_flat().iter().map(|t| t.abs()).sum();
    sse / x.rows() as f64 + lambda * l1
}

pub struct GradientReport {
    pub configs: usize,
    pub max_rel_err: f64,
    pub compared: usize,
}

/// Compares analytic gradients with central differences on `configs` random
/// networks (p ≤ 8, k ≤ 4, m ≤ 6). The L1 term enters only at coordinates
/// with magnitude above [`L1_THRESHOLD`].
pub fn gradient_check(configs: usize, seed: u64) -> GradientReport {
    let mut rng = SplitMix64::new(seed);
    let lambda = 1e-3;
    let mut max_rel_err: f64 = 0.0;
    let mut compared = 0;
    for c in 0..configs {
        let p = 1 + rng.below(8);
        let k = 1 + rng.below(p.min(4));
        let m = 1 + rng.below(6);
        let n = 5 + rng.below(20);
        let activation = if c % 2 == 0 { Activation::Tanh } else { Activation::Logistic };
        let len = p * k + k * m + 2 * m + 1;
        let flat: Vec<f64> = (0..len).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let params = NetworkParams::from_flat(p, k, m, activation, &flat).unwrap();
        let x = Matrix::new(n, p, (0..n * p).map(|_| rng.uniform(-2.0, 2.0)).collect()).unwrap();
        let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();

        let (_, g_pen) = loss_and_gradient(&params, &x, &y, lambda).unwrap();
        let (_, g_mse) = loss_and_gradient(&params, &x, &y, 0.0).unwrap();
        let (g_pen, g_mse) = (g_pen.to_flat(), g_mse.to_flat());
        for i in 0..len {
            let with_l1 = flat[i].abs() > L1_THRESHOLD;
            let lam = if with_l1 { lambda } else { 0.0 };
            let at = |delta: f64| {
                let mut f = flat.clone();
                f[i] += delta;
                let q = NetworkParams::from_flat(p, k, m, activation, &f).unwrap();
                reference_loss(&q, &x, &y, lam)
            };
            let fd = (at(FD_STEP) - at(-FD_STEP)) / (2.0 * FD_STEP);
            let analytic = if with_l1 { g_pen[i] } else { g_mse[i] };
            let scale = analytic.abs().max(fd.abs()).max(1e-8);
            max_rel_err = max_rel_err.max((analytic - fd).abs() / scale);
            compared += 1;
        }
    }
    GradientReport { configs, max_rel_err, compared }
}

/// Validation errors shaped as a single step of height `a` at `d_star`.
pub fn step_mse(k: usize, d_star: usize, a: f64, b: f64) -> f64 {
    if k < d_star {
        a + b
    } else {
        b
    }
}

/// Smallest k in 1..=p minimizing `mse(k) + k·pen`.
pub fn brute_force_argmin(p: usize, pen: f64, mse: impl Fn(usize) -> f64) -> usize {
    let mut best = (f64::INFINITY, 0);
    for k in 1..=p {
        let cr = mse(k) + k as f64 * pen;
        if cr < best.0 {
            best = (cr, k);
        }
    }
    best.1
}

/// Random `rows×cols` matrix with standard normal entries.
pub fn gaussian(rng: &mut SplitMix64, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.standard_normal()).collect()).unwrap()
}
