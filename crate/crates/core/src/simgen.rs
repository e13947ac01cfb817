//! Synthetic regression models 1–7.
//!
//! Every model draws predictors `X`, forms `Z = A X` for a `d×p` matrix `A`,
//! and evaluates a fixed nonlinear response of `Z` plus Gaussian noise. For
//! models other than 3, `A` is built from scaled rows of a random orthogonal
//! matrix `V`. The true central space is spanned by the columns of `Aᵀ`.
//!
//! Draw order for one dataset: the `p×p` Gaussian matrix behind `V`
//! (row-major), then for each sample its `p` predictors followed by its noise
//! value, all from one [`SplitMix64`] stream seeded with `ModelSpec::seed`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_basis, Matrix};
use crate::rng::SplitMix64;

/// Noise multiplier used when none is given.
pub const DEFAULT_NOISE: f64 = 0.1;

/// Fixed noise multiplier of model 3.
pub const MODEL3_NOISE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Covariates {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: u8,
    pub n: usize,
    pub p: usize,
    /// Multiplier on the standard Gaussian noise; `None` means
    /// [`DEFAULT_NOISE`]. Ignored by model 3.
    pub noise: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// `p×d_true`, the columns of `Aᵀ`.
    pub beta_true: Matrix,
    pub d_true: usize,
}

/// Structural dimension of each model's response.
pub fn d_true(model_id: u8) -> Result<usize> {
    match model_id {
        1 | 2 | 7 => Ok(5),
        3 => Ok(4),
        4 | 5 => Ok(3),
        6 => Ok(6),
        other => Err(Error::invalid(format!("unknown model {other}, expected 1..=7"))),
    }
}

impl ModelSpec {
    pub fn new(model_id: u8, n: usize, p: usize, seed: u64) -> Self {
        Self {
            model_id,
            n,
            p,
            noise: None,
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = d_true(self.model_id)?;
        if self.model_id == 3 && self.p != 10 {
            return Err(Error::invalid(format!("model 3 requires p = 10, got {}", self.p)));
        }
        if self.p < d {
            return Err(Error::invalid(format!(
                "model {} needs p >= {d}, got {}",
                self.model_id, self.p
            )));
        }
        if let Some(c) = self.noise {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("noise multiplier {c} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn noise_level(&self) -> f64 {
        if self.model_id == 3 {
            MODEL3_NOISE
        } else {
            self.noise.unwrap_or(DEFAULT_NOISE)
        }
    }

    fn covariates(&self) -> Covariates {
        match self.model_id {
            3 | 4 => Covariates::Gaussian,
            _ => Covariates::Uniform,
        }
    }
}

/// `p×p` orthogonal matrix from the QR factor of a seeded Gaussian matrix.
pub fn random_orthogonal(p: usize, seed: u64) -> Matrix {
    orthogonal_from(&mut SplitMix64::new(seed), p)
}

fn orthogonal_from(rng: &mut SplitMix64, p: usize) -> Matrix {
    // A Gaussian square matrix is singular with probability zero; redraw on
    // the numerically singular event.
    loop {
        let g = Matrix::new(p, p, (0..p * p).map(|_| rng.standard_normal()).collect())
            .expect("finite draws");
        if let Ok(q) = orthonormal_basis(&g) {
            return q;
        }
    }
}

fn row_scalings(model_id: u8) -> &'static [f64] {
    match model_id {
        1 => &[1.01, 1.01, 1.02, 1.1, 1.03],
        2 => &[1.0; 5],
        4 | 5 => &[1.0; 3],
        6 => &[1.01, 1.01, 1.02, 1.1, 1.03, 1.01],
        7 => &[0.01, 1.01, 1.02, 1.1, 1.03],
        _ => unreachable!("model 3 uses fixed directions"),
    }
}

/// The four fixed directions of model 3 as rows of `A` (p = 10).
pub fn model3_directions() -> Matrix {
    let s30 = 30f64.sqrt();
    let s35 = 35f64.sqrt();
    let s15 = 15f64.sqrt();
    let rows: [[f64; 10]; 4] = [
        [1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0].map(|v| v / s30),
        [-2.0, 1.0, -4.0, 3.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0].map(|v| v / s35),
        [0.0, 0.0, 0.0, 0.0, 2.0, -1.0, 2.0, 1.0, 2.0, 1.0].map(|v| v / s15),
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0, 1.0, 1.0].map(|v| v / 2.0),
    ];
    Matrix::from_rows(&rows).expect("fixed directions")
}

/// Noise-free response of `model_id` at the reduced predictors `z`.
pub fn response(model_id: u8, z: &[f64]) -> f64 {
    match model_id {
        1 | 7 => model1_mean(z),
        2 => {
            let (z1, z2, z3, z4, z5) = (z[0], z[1], z[2], z[3], z[4]);
            z5 / (5.0 + (1.0 - 0.2 * z3).powi(2))
                + (0.5 * z1 + z2).exp()
                + 2.0 * z1 * z4 * z5
                + (z4 - 0.5 * z1 + z2) * (0.5 * z3).cos()
                + 0.2 * (z1 + z5).sin()
        }
        3 => z[0] * z[1].powi(2) + z[2] * z[3],
        4 | 5 => 0.5 * z[0] * z[1] + (z[0] - z[2]).sin() + (z[1] + z[2]).cos(),
        6 => model1_mean(z) + 0.001 * z[5].powi(2) * (z[0].powi(2) + z[1].powi(2) + z[2].powi(2)),
        _ => unreachable!("validated model id"),
    }
}

fn model1_mean(z: &[f64]) -> f64 {
    let (z1, z2, z3, z4, z5) = (z[0], z[1], z[2], z[3], z[4]);
    z3 - z1 * z5
        + 0.5 * z2.powi(2)
        + (z3 + 0.5 * z4) / (1.0 + z1.powi(2))
        + (0.5 * (z3 - z4)).exp() * (z2 - z5 + 1.5 * z3).sin()
}

pub fn generate(spec: &ModelSpec) -> Result<GeneratedData> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = SplitMix64::new(spec.seed);

    let a = if spec.model_id == 3 {
        model3_directions()
    } else {
        let v = orthogonal_from(&mut rng, p);
        let scalings = row_scalings(spec.model_id);
        let rows: Vec<Vec<f64>> = scalings
            .iter()
            .enumerate()
            .map(|(i, s)| v.row(i).iter().map(|x| s * x).collect())
            .collect();
        Matrix::from_rows(&rows)?
    };
    let d = a.rows();
    let noise = spec.noise_level();
    let covariates = spec.covariates();

    let mut x = Matrix::zeros(n, p);
    let mut y = Vec::with_capacity(n);
    let mut z = vec![0.0; d];
    for i in 0..n {
        let row = x.row_mut(i);
        for v in row.iter_mut() {
            *v = match covariates {
                Covariates::Uniform => rng.uniform(-1.0, 1.0),
                Covariates::Gaussian => rng.standard_normal(),
            };
        }
        for (c, zc) in z.iter_mut().enumerate() {
            *zc = a.row(c).iter().zip(row.iter()).map(|(w, v)| w * v).sum();
        }
        let eps = rng.standard_normal();
        y.push(response(spec.model_id, &z) + noise * eps);
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("response {i} is not finite")));
    }
    Ok(GeneratedData {
        x,
        y,
        beta_true: a.transpose(),
        d_true: d,
    })
}
