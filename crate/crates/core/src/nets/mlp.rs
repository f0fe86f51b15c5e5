//! Plain multilayer perceptron with a hand-derived backward pass.
//!
//! Two evaluation paths share the same math: a per-vector path used during
//! rollouts, and a batched path (one matrix per layer) used by the training
//! updates where throughput matters. The tests pin the two paths to each
//! other and to finite differences.

use crate::error::{CoreError, Result};
use crate::numkit::{affine_forward, affine_forward_batch, axpy, Matrix, RngStream};
use serde::{Deserialize, Serialize};

/// Per-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the post-activation value.
    #[inline]
    fn deriv_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// Layer sizes plus one activation tag per affine layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(CoreError::Contract(
                "an MLP needs at least input and output sizes".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(CoreError::Contract("layer sizes must be positive".into()));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(CoreError::dim(
                "activation count",
                layer_sizes.len() - 1,
                activations.len(),
            ));
        }
        Ok(MlpSpec {
            layer_sizes,
            activations,
        })
    }

    /// A trunk: hidden layers only, all sharing one activation, with the
    /// last hidden layer as the (activated) output.
    pub fn trunk(input: usize, hidden: &[usize], act: Activation) -> Self {
        assert!(!hidden.is_empty(), "a trunk needs at least one hidden layer");
        let mut sizes = Vec::with_capacity(hidden.len() + 1);
        sizes.push(input);
        sizes.extend_from_slice(hidden);
        MlpSpec {
            layer_sizes: sizes,
            activations: vec![act; hidden.len()],
        }
    }

    /// Hidden layers share one activation; the output layer is linear.
    pub fn with_hidden(input: usize, hidden: &[usize], output: usize, act: Activation) -> Self {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        let mut acts = vec![act; hidden.len()];
        acts.push(Activation::Identity);
        MlpSpec {
            layer_sizes: sizes,
            activations: acts,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.activations.len()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }
}

/// Per-layer weight/bias store shaped by an [`MlpSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Gradients share the parameter layout exactly.
pub type MlpGrads = MlpParams;

impl MlpParams {
    pub fn zeros(spec: &MlpSpec) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for o in 0..spec.n_layers() {
            weights.push(Matrix::zeros(spec.layer_sizes[o + 1], spec.layer_sizes[o]));
            biases.push(vec![0.0; spec.layer_sizes[o + 1]]);
        }
        MlpParams { weights, biases }
    }

    /// Orthogonally initialized weights (zero biases).
    pub fn orthogonal(spec: &MlpSpec, gain: f64, rng: &mut RngStream) -> Result<Self> {
        let mut p = Self::zeros(spec);
        for w in &mut p.weights {
            *w = crate::numkit::orthogonal_init(w.rows(), w.cols(), gain, rng)?;
        }
        Ok(p)
    }

    pub fn zeros_like(other: &MlpParams) -> Self {
        MlpParams {
            weights: other
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: other.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Flat views in a fixed order (W0, b0, W1, b1, ...) for the optimizer,
    /// Polyak averaging, checkpointing, and finite-difference tests.
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.weights.len() * 2);
        for (w, b) in self.weights.iter().zip(self.biases.iter()) {
            out.push(w.as_slice());
            out.push(b.as_slice());
        }
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.weights.len() * 2);
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w.as_mut_slice());
            out.push(b.as_mut_slice());
        }
        out
    }

    pub fn n_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.slices()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }

    fn check_spec(&self, spec: &MlpSpec) -> Result<()> {
        if self.weights.len() != spec.n_layers() {
            return Err(CoreError::dim(
                "mlp layer count",
                spec.n_layers(),
                self.weights.len(),
            ));
        }
        for o in 0..spec.n_layers() {
            let (r, c) = (spec.layer_sizes[o + 1], spec.layer_sizes[o]);
            if self.weights[o].rows() != r || self.weights[o].cols() != c {
                return Err(CoreError::dim(
                    "mlp weight shape",
                    format!("{r}x{c}"),
                    format!("{}x{}", self.weights[o].rows(), self.weights[o].cols()),
                ));
            }
            if self.biases[o].len() != r {
                return Err(CoreError::dim("mlp bias length", r, self.biases[o].len()));
            }
        }
        Ok(())
    }
}

/// Post-activation values for every layer; `acts[0]` is the input itself.
#[derive(Debug, Clone)]
pub struct MlpCache {
    pub acts: Vec<Vec<f64>>,
}

pub fn mlp_forward(
    spec: &MlpSpec,
    params: &MlpParams,
    input: &[f64],
) -> Result<(Vec<f64>, MlpCache)> {
    params.check_spec(spec)?;
    if input.len() != spec.input_dim() {
        return Err(CoreError::dim("mlp input", spec.input_dim(), input.len()));
    }
    let mut acts = Vec::with_capacity(spec.n_layers() + 1);
    acts.push(input.to_vec());
    for o in 0..spec.n_layers() {
        let mut z = affine_forward(&params.weights[o], &params.biases[o], acts.last().unwrap())?;
        let act = spec.activations[o];
        for v in &mut z {
            *v = act.apply(*v);
        }
        acts.push(z);
    }
    Ok((acts.last().unwrap().clone(), MlpCache { acts }))
}

/// Exact gradients of `output · output_grad` with respect to every parameter
/// and the input, given the cache of a matching forward call.
pub fn mlp_backward(
    spec: &MlpSpec,
    params: &MlpParams,
    cache: &MlpCache,
    output_grad: &[f64],
) -> Result<(MlpGrads, Vec<f64>)> {
    params.check_spec(spec)?;
    if cache.acts.len() != spec.n_layers() + 1 {
        return Err(CoreError::Contract(
            "stale cache: layer count does not match spec".into(),
        ));
    }
    for (o, a) in cache.acts.iter().enumerate() {
        if a.len() != spec.layer_sizes[o] {
            return Err(CoreError::Contract(format!(
                "stale cache: activation {o} has length {}, spec says {}",
                a.len(),
                spec.layer_sizes[o]
            )));
        }
    }
    if output_grad.len() != spec.output_dim() {
        return Err(CoreError::dim(
            "mlp output grad",
            spec.output_dim(),
            output_grad.len(),
        ));
    }

    let mut grads = MlpParams::zeros(spec);
    let mut delta = output_grad.to_vec();
    for o in (0..spec.n_layers()).rev() {
        let act = spec.activations[o];
        let y = &cache.acts[o + 1];
        for (d, &yo) in delta.iter_mut().zip(y.iter()) {
            *d *= act.deriv_from_output(yo);
        }
        let z = &cache.acts[o];
        for (i, &d) in delta.iter().enumerate() {
            axpy(grads.weights[o].row_mut(i), d, z);
            grads.biases[o][i] += d;
        }
        // Input gradient of this layer: Wᵀ · delta.
        let mut prev = vec![0.0; z.len()];
        for (i, &d) in delta.iter().enumerate() {
            axpy(&mut prev, d, params.weights[o].row(i));
        }
        delta = prev;
    }
    Ok((grads, delta))
}

/// Batched forward; rows of `inputs` are independent samples.
#[derive(Debug, Clone)]
pub struct MlpBatchCache {
    pub acts: Vec<Matrix>,
}

pub fn mlp_forward_batch(
    spec: &MlpSpec,
    params: &MlpParams,
    inputs: &Matrix,
) -> Result<(Matrix, MlpBatchCache)> {
    params.check_spec(spec)?;
    if inputs.cols() != spec.input_dim() {
        return Err(CoreError::dim(
            "mlp batch input",
            spec.input_dim(),
            inputs.cols(),
        ));
    }
    let mut acts = Vec::with_capacity(spec.n_layers() + 1);
    acts.push(inputs.clone());
    for o in 0..spec.n_layers() {
        let mut z = affine_forward_batch(acts.last().unwrap(), &params.weights[o], &params.biases[o]);
        let act = spec.activations[o];
        for v in z.as_mut_slice() {
            *v = act.apply(*v);
        }
        acts.push(z);
    }
    Ok((acts.last().unwrap().clone(), MlpBatchCache { acts }))
}

/// Batched backward. Parameter gradients are summed over the batch rows.
/// Either output can be skipped when the caller does not need it.
pub fn mlp_backward_batch(
    spec: &MlpSpec,
    params: &MlpParams,
    cache: &MlpBatchCache,
    out_grads: &Matrix,
    want_params: bool,
    want_inputs: bool,
) -> Result<(Option<MlpGrads>, Option<Matrix>)> {
    params.check_spec(spec)?;
    if cache.acts.len() != spec.n_layers() + 1 {
        return Err(CoreError::Contract("stale batch cache".into()));
    }
    let n = cache.acts[0].rows();
    if out_grads.rows() != n || out_grads.cols() != spec.output_dim() {
        return Err(CoreError::dim(
            "mlp batch output grad",
            format!("{n}x{}", spec.output_dim()),
            format!("{}x{}", out_grads.rows(), out_grads.cols()),
        ));
    }

    let mut grads = if want_params {
        Some(MlpParams::zeros(spec))
    } else {
        None
    };
    let mut delta = out_grads.clone();
    for o in (0..spec.n_layers()).rev() {
        let act = spec.activations[o];
        let y = &cache.acts[o + 1];
        for (d, &yo) in delta.as_mut_slice().iter_mut().zip(y.as_slice()) {
            *d *= act.deriv_from_output(yo);
        }
        let z = &cache.acts[o];
        if let Some(g) = grads.as_mut() {
            for s in 0..n {
                let drow = delta.row(s);
                let zrow = z.row(s);
                for (i, &d) in drow.iter().enumerate() {
                    axpy(g.weights[o].row_mut(i), d, zrow);
                    g.biases[o][i] += d;
                }
            }
        }
        let need_prev = o > 0 || want_inputs;
        if !need_prev {
            break;
        }
        let mut prev = Matrix::zeros(n, z.cols());
        for s in 0..n {
            let drow = delta.row(s);
            let prow = prev.row_mut(s);
            for (i, &d) in drow.iter().enumerate() {
                axpy(prow, d, params.weights[o].row(i));
            }
        }
        delta = prev;
    }
    let input_grads = if want_inputs { Some(delta) } else { None };
    Ok((grads, input_grads))
}
