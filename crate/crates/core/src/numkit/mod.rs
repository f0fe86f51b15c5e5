//! Dense linear algebra, deterministic RNG streams, parameter
//! initialization, and the Adam optimizer shared by all learners.

pub mod adam;
pub mod matrix;
pub mod rng;

pub use adam::AdamState;
pub use matrix::{affine_forward, affine_forward_batch, axpy, dot, matmul, matvec, Matrix};
pub use rng::{gaussian_draw, RngStream};

use crate::error::{CoreError, Result};

/// Orthogonal initialization: the returned matrix has orthonormal rows when
/// rows <= cols, orthonormal columns otherwise, scaled by `gain`.
///
/// Uses modified Gram–Schmidt with one re-orthogonalization pass on Gaussian
/// draws; deterministic given the stream.
pub fn orthogonal_init(rows: usize, cols: usize, gain: f64, rng: &mut RngStream) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(CoreError::Contract(
            "orthogonal_init needs positive dims".into(),
        ));
    }
    // Orthonormalize the longer-axis vectors: k vectors of length n, k <= n.
    let (k, n, transposed) = if rows <= cols {
        (rows, cols, false)
    } else {
        (cols, rows, true)
    };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v = rng.gaussian_vec(n);
        // Two projection sweeps keep the Gram matrix at 1e-10 off identity.
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                axpy(&mut v, -p, b);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm < 1e-8 {
            // Degenerate draw; take another. Still deterministic in the stream.
            continue;
        }
        for x in &mut v {
            *x /= norm;
        }
        basis.push(v);
    }
    let mut m = Matrix::zeros(rows, cols);
    for (i, b) in basis.iter().enumerate() {
        for (j, &x) in b.iter().enumerate() {
            if transposed {
                m.set(j, i, gain * x);
            } else {
                m.set(i, j, gain * x);
            }
        }
    }
    Ok(m)
}
