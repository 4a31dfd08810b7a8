//! Small dense matrices and power-iteration spectral estimates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, norm, sqrt};

/// Relative tolerance used by every power iteration in the crate.
pub const POWER_TOL: f64 = 1e-10;
/// Iteration budget used by every power iteration in the crate.
pub const POWER_BUDGET: usize = 10_000;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
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

    /// The averaging matrix `(1/n) 1 1ᵀ`.
    pub fn averaging(n: usize) -> Self {
        Matrix {
            rows: n,
            cols: n,
            data: vec![1.0 / n as f64; n * n],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `out = self * v`
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = crate::math::dot(self.row(i), v);
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(v, &mut out);
        out
    }

    /// `out = selfᵀ * v`
    pub fn matvec_t_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
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

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, a) in s.iter_mut().zip(self.row(i)) {
                *acc += a;
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max)
    }

    /// Spectral norm `‖self‖_op` by power iteration on `selfᵀ self`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let mut tmp = vec![0.0; self.rows];
        spectral_norm_op(
            self.cols,
            |v, out| {
                self.matvec_into(v, &mut tmp);
                self.matvec_t_into(&tmp, out);
            },
            POWER_TOL,
            POWER_BUDGET,
        )
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Fixed, generic starting vector for power iterations (golden-ratio sequence).
pub(crate) fn start_vector(n: usize) -> Vec<f64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * PHI;
            t - libm::floor(t) + 0.1
        })
        .collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Largest eigenvalue of a symmetric positive semidefinite operator
/// `gram` by power iteration. Returns `(eigenvalue, unit eigenvector)`.
///
/// Stops once the Rayleigh quotient changes by at most `tol` relative.
pub fn top_eigenpair_psd(
    dim: usize,
    mut gram: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    budget: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut v = start_vector(dim);
    let mut w = vec![0.0; dim];
    let mut prev = f64::NAN;
    for _ in 0..budget {
        gram(&v, &mut w);
        let est = crate::math::dot(&v, &w);
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok((0.0, v));
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if abs(est - prev) <= tol * abs(est) {
            return Ok((est, v));
        }
        prev = est;
    }
    Err(Error::NotConverged {
        what: "power iteration",
        budget,
    })
}

/// Spectral norm of an operator given through `gram(v) = MᵀM v`.
pub fn spectral_norm_op(
    dim: usize,
    gram: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    budget: usize,
) -> Result<f64> {
    top_eigenpair_psd(dim, gram, tol, budget).map(|(lam, _)| sqrt(lam.max(0.0)))
}
