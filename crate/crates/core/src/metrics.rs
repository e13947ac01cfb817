//! Accuracy measures: subspace agreement, prediction error, and replication
//! summaries.

use crate::error::{Error, Result};
use crate::linalg::{det, matmul, orthonormal_basis, Matrix};

/// Vector correlation between the column spans of `beta_true` (p×d) and
/// `beta_hat` (p×d̂): `sqrt(det(Q̂ᵀ Q Qᵀ Q̂))` for orthonormal bases `Q`, `Q̂`.
///
/// Equals the product of the cosines of the principal angles, so it is 1 for
/// equal spans, 0 when some estimated direction is orthogonal to the true
/// space, and always 0 when `d̂ > d`.
pub fn vector_correlation(beta_true: &Matrix, beta_hat: &Matrix) -> Result<f64> {
    if beta_true.rows() != beta_hat.rows() {
        return Err(Error::dims(format!(
            "bases live in dimensions {} and {}",
            beta_true.rows(),
            beta_hat.rows()
        )));
    }
    if beta_true.cols() == 0 || beta_hat.cols() == 0 {
        return Err(Error::invalid("bases need at least one column"));
    }
    let q = orthonormal_basis(beta_true)?;
    let q_hat = orthonormal_basis(beta_hat)?;
    if q_hat.cols() > q.cols() {
        return Ok(0.0);
    }
    // Q̂ᵀQ is d̂×d; its Gram matrix is Q̂ᵀ Q Qᵀ Q̂.
    let cross = matmul(&q_hat.transpose(), &q)?;
    let gram = matmul(&cross, &cross.transpose())?;
    Ok(det(&gram)?.clamp(0.0, 1.0).sqrt())
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::dims(format!(
            "{} predictions for {} responses",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("mse of empty vectors"));
    }
    Ok(pred.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / pred.len() as f64)
}

/// Sample mean and standard error (`sd/√n`, `n−1` denominator).
pub fn aggregate(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::invalid(format!(
            "standard error needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = SplitMix64::new(seed);
        Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.standard_normal()).collect()).unwrap()
    }

    #[test]
    fn same_span_gives_one() {
        let b = random(7, 3, 1);
        assert!((vector_correlation(&b, &b).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_spans_give_zero() {
        let truth = Matrix::from_columns(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let hat = Matrix::from_columns(&[[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(vector_correlation(&truth, &hat).unwrap(), 0.0);
    }

    #[test]
    fn sixty_degrees() {
        let truth = Matrix::from_columns(&[[1.0, 0.0]]).unwrap();
        let angle = std::f64::consts::FRAC_PI_3;
        let hat = Matrix::from_columns(&[[angle.cos(), angle.sin()]]).unwrap();
        assert!((vector_correlation(&truth, &hat).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn overestimated_dimension_gives_zero() {
        let truth = Matrix::from_columns(&[[1.0, 0.0]]).unwrap();
        assert_eq!(vector_correlation(&truth, &Matrix::identity(2)).unwrap(), 0.0);
    }

    #[test]
    fn rank_deficient_input() {
        let truth = Matrix::from_columns(&[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            vector_correlation(&truth, &random(3, 1, 2)),
            Err(Error::RankDeficient { column: 1 })
        ));
        assert!(vector_correlation(&random(3, 1, 2), &random(4, 1, 2)).is_err());
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 1.0], &[0.0, 2.0]).unwrap(), 1.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn mse_matches_loop_oracles() {
        let mut rng = SplitMix64::new(3);
        let a: Vec<f64> = (0..100).map(|_| rng.standard_normal()).collect();
        let b: Vec<f64> = (0..100).map(|_| rng.standard_normal()).collect();
        let mut one_pass = 0.0;
        for i in 0..100 {
            one_pass += (a[i] - b[i]) * (a[i] - b[i]) / 100.0;
        }
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let two_pass = diffs.iter().map(|d| d * d).sum::<f64>() / 100.0;
        let got = mse(&a, &b).unwrap();
        assert!((got - one_pass).abs() < 1e-12);
        assert!((got - two_pass).abs() < 1e-12);
    }

    #[test]
    fn aggregate_cases() {
        assert_eq!(aggregate(&[1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, se) = aggregate(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((se - 1.0).abs() < 1e-15);
        assert!(aggregate(&[1.0]).is_err());
    }

    #[test]
    fn aggregate_matches_two_pass() {
        let mut rng = SplitMix64::new(8);
        let v: Vec<f64> = (0..10).map(|_| rng.uniform(0.0, 5.0)).collect();
        let mean = v.iter().sum::<f64>() / 10.0;
        let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
        let se = (ss / 9.0).sqrt() / 10f64.sqrt();
        let (m, s) = aggregate(&v).unwrap();
        assert!((m - mean).abs() < 1e-12 && (s - se).abs() < 1e-12);
    }
}
