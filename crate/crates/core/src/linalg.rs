//! Small dense real matrices.
//!
//! Row-major storage, enough operations for the network trainer, the subspace
//! metric, and the data generators. The general product goes through
//! `matrixmultiply`, everything else is written out.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance below which a projected column counts as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Relative pivot tolerance for [`det`].
pub const PIVOT_TOL: f64 = 1e-14;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dims(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::dims(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        if let Some(pos) = m.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Keeps the rows whose indices are listed, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise absolute difference; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> Option<f64> {
        if self.shape() != other.shape() {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        )
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// `a · b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::dims(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut c = Matrix::zeros(a.rows, b.cols);
    gemm(
        a.rows,
        a.cols,
        b.cols,
        Op::N(&a.data),
        Op::N(&b.data),
        &mut c.data,
        0.0,
    );
    Ok(c)
}

/// Operand of [`gemm`]: a row-major buffer, used as is or transposed.
#[derive(Clone, Copy)]
pub(crate) enum Op<'a> {
    N(&'a [f64]),
    T(&'a [f64]),
}

/// `c = a·b + beta·c` on row-major buffers, where `a` is `m×k` and `b` is
/// `k×n` after applying the operand transposes.
pub(crate) fn gemm(m: usize, k: usize, n: usize, a: Op, b: Op, c: &mut [f64], beta: f64) {
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (a_ptr, rsa, csa) = match a {
        Op::N(s) => {
            debug_assert_eq!(s.len(), m * k);
            (s.as_ptr(), k as isize, 1)
        }
        Op::T(s) => {
            debug_assert_eq!(s.len(), m * k);
            (s.as_ptr(), 1, m as isize)
        }
    };
    let (b_ptr, rsb, csb) = match b {
        Op::N(s) => {
            debug_assert_eq!(s.len(), k * n);
            (s.as_ptr(), n as isize, 1)
        }
        Op::T(s) => {
            debug_assert_eq!(s.len(), k * n);
            (s.as_ptr(), 1, k as isize)
        }
    };
    // SAFETY: the slice lengths checked above cover every index reachable
    // through the given dimensions and strides, and `c` does not alias them.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a_ptr,
            rsa,
            csa,
            b_ptr,
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of the column span of `m`, columns in input order.
///
/// Modified Gram–Schmidt with one re-orthogonalization pass. Each output
/// column is signed so that its first nonzero component is positive.
pub fn orthonormal_basis(m: &Matrix) -> Result<Matrix> {
    let (p, k) = m.shape();
    if k > p {
        return Err(Error::dims(format!(
            "{k} columns cannot be independent in dimension {p}"
        )));
    }
    let columns: Vec<Vec<f64>> = (0..k).map(|j| m.column(j)).collect();
    let scale = columns.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let tol = RANK_TOL * scale;

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (j, mut v) in columns.into_iter().enumerate() {
        for _pass in 0..2 {
            for q in &basis {
                let coef = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= coef * qi);
            }
        }
        let len = norm(&v);
        if len.is_nan() || len <= tol {
            return Err(Error::RankDeficient { column: j });
        }
        v.iter_mut().for_each(|vi| *vi /= len);
        basis.push(v);
    }

    for q in &mut basis {
        let lead = q.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(0.0);
        if lead < 0.0 {
            q.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Matrix::from_columns(&basis)
}

/// Determinant by LU factorization with partial pivoting.
pub fn det(m: &Matrix) -> Result<f64> {
    let (n, cols) = m.shape();
    if n != cols {
        return Err(Error::NotSquare { rows: n, cols });
    }
    let tol = PIVOT_TOL * m.max_abs();
    let mut a = m.clone();
    let mut det = 1.0;
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= tol {
            return Ok(0.0);
        }
        if pivot_row != col {
            for j in 0..n {
                a.data.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        let pivot = a[(col, col)];
        det *= pivot;
        for r in col + 1..n {
            let factor = a[(r, col)] / pivot;
            if factor != 0.0 {
                for j in col + 1..n {
                    a[(r, j)] -= factor * a[(col, j)];
                }
            }
        }
    }
    Ok(det)
}
