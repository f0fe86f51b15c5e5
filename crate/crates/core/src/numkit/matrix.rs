//! Dense row-major matrices and the handful of kernels everything else is
//! built on. The kernels are written so LLVM vectorizes the inner loops:
//! dot products run four accumulators, everything else is an axpy over a
//! contiguous row.

use crate::error::{CoreError, Result};

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dims must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        Matrix { rows, cols, data }
    }

    /// Build from slice-of-rows; handy in tests.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Max absolute entry; zero matrices report 0.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Dot product with four running accumulators so the compiler is free to
/// vectorize without reassociating a single serial sum.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let chunks = n / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..n {
        tail += a[j] * b[j];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// y += alpha * x over contiguous slices.
#[inline]
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * xi;
    }
}

/// c = a · b.
pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols, b.rows, "matmul inner dims must agree");
    let mut c = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let arow = a.row(i);
        let crow = c.row_mut(i);
        for (k, &aik) in arow.iter().enumerate() {
            axpy(crow, aik, b.row(k));
        }
    }
    c
}

/// Matrix-vector product y = m · x.
pub fn matvec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(m.cols, x.len(), "matvec dims must agree");
    (0..m.rows).map(|r| dot(m.row(r), x)).collect()
}

/// W·z + b with full dimension checking; the affine building block of every
/// network layer.
pub fn affine_forward(w: &Matrix, b: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    if w.cols() != z.len() {
        return Err(CoreError::dim("affine_forward input", w.cols(), z.len()));
    }
    if w.rows() != b.len() {
        return Err(CoreError::dim("affine_forward bias", w.rows(), b.len()));
    }
    let mut out = matvec(w, z);
    for (o, bi) in out.iter_mut().zip(b.iter()) {
        *o += bi;
    }
    Ok(out)
}

/// Batched affine: out[n] = input.row(n) · Wᵀ + b for every sample row.
pub fn affine_forward_batch(input: &Matrix, w: &Matrix, b: &[f64]) -> Matrix {
    assert_eq!(input.cols(), w.cols(), "batch affine input width");
    assert_eq!(w.rows(), b.len(), "batch affine bias length");
    let wt = w.transpose();
    let mut out = Matrix::zeros(input.rows(), w.rows());
    for i in 0..input.rows() {
        out.row_mut(i).copy_from_slice(b);
        let inr = input.row(i);
        let outr = out.row_mut(i);
        for (k, &v) in inr.iter().enumerate() {
            axpy(outr, v, wt.row(k));
        }
    }
    out
}
