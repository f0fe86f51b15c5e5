//! Adam optimizer over flat parameter slices.
//!
//! Every network in this crate exposes its parameters as an ordered list of
//! `&mut [f64]` slices; the optimizer keeps first/second moment stores with
//! the same layout and applies the standard bias-corrected update.

use crate::error::{CoreError, Result};

/// Moment stores and step counter for one parameter set.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    /// Fresh state shaped like the given parameter slices.
    /// beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
    pub fn new(shapes: &[usize]) -> Self {
        AdamState {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn for_slices(slices: &[&[f64]]) -> Self {
        let shapes: Vec<usize> = slices.iter().map(|s| s.len()).collect();
        Self::new(&shapes)
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam step: params -= lr * m̂ / (sqrt(v̂) + eps), applied in place.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]], lr: f64) -> Result<()> {
        if lr <= 0.0 {
            return Err(CoreError::Contract(format!(
                "adam learning rate must be positive, got {lr}"
            )));
        }
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(CoreError::dim(
                "adam tensor count",
                self.m.len(),
                params.len().max(grads.len()),
            ));
        }
        for i in 0..params.len() {
            if params[i].len() != self.m[i].len() || grads[i].len() != self.m[i].len() {
                return Err(CoreError::dim(
                    "adam tensor shape",
                    self.m[i].len(),
                    params[i].len().max(grads[i].len()),
                ));
            }
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (i, p) in params.iter_mut().enumerate() {
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            let g = grads[i];
            for j in 0..p.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let mhat = m[j] / bc1;
                let vhat = v[j] / bc2;
                p[j] -= lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
