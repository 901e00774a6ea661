//! Matrix containers: symmetric tridiagonal (the operator representation) and a
//! small row-major dense matrix for finite sections of `U`, `R~`, `K` and `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Symmetric tridiagonal matrix, 0-based; only the upper off-diagonal is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    /// `off.len()` must be `diag.len() - 1`, and `diag` must be non-empty.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Dimension { got: 0, min: 1 });
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::Domain(format!(
                "off-diagonal has length {}, expected {}",
                off.len(),
                diag.len() - 1
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Leading `n x n` principal section.
    pub fn leading(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.dim() {
            return Err(Error::IndexOutOfRange {
                index: n,
                limit: self.dim(),
            });
        }
        Ok(Self {
            diag: self.diag[..n].to_vec(),
            off: self.off[..n - 1].to_vec(),
        })
    }

    /// Gershgorin enclosure `[lo, hi]` of the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            let r = left + right;
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, self.diag[i]);
            if i + 1 < n {
                m.set(i, i + 1, self.off[i]);
                m.set(i + 1, i, self.off[i]);
            }
        }
        m
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
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
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds entry `(i, j)` from `f(i, j)`; rows are filled in parallel.
    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let mut m = Self::zeros(rows, cols);
        par::fill_rows(&mut m.data, cols, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Matrix product. Each output entry is a sequential sum over the inner index,
    /// so the result does not depend on the thread count.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let inner = self.cols;
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        par::fill_rows(&mut out.data, oc, |i, row| {
            let a = self.row(i);
            for (k, &aik) in a.iter().enumerate().take(inner) {
                if aik == 0.0 {
                    continue;
                }
                let b = other.row(k);
                for (v, &bkj) in row.iter_mut().zip(b) {
                    *v += aik * bkj;
                }
            }
        });
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| d[i] * self.get(i, j))
    }

    /// `self * diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * d[j])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|self - other|` over the leading `block x block` section.
    pub fn max_abs_diff_block(&self, other: &Self, block: usize) -> f64 {
        let b = block.min(self.rows).min(self.cols);
        let mut m = 0.0f64;
        for i in 0..b {
            for j in 0..b {
                m = m.max((self.get(i, j) - other.get(i, j)).abs());
            }
        }
        m
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        (0..self.rows)
            .map(|i| self.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}
