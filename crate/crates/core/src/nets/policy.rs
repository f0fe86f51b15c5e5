//! Tanh-squashed Gaussian policy with reparameterized sampling.
//!
//! The network maps a state through a shared trunk to a mean head and a
//! log-std head. Actions are `tanh(mu + sigma * xi)` with `xi` standard
//! normal, so gradients flow through the sample pathwise. Log-probabilities
//! carry the tanh change-of-variables correction in the softplus form, which
//! stays finite for saturated actions.

use crate::error::{CoreError, Result};
use crate::nets::mlp::{
    mlp_backward, mlp_backward_batch, mlp_forward, mlp_forward_batch, Activation, MlpBatchCache,
    MlpCache, MlpGrads, MlpParams, MlpSpec,
};
use crate::numkit::{affine_forward, affine_forward_batch, axpy, Matrix, RngStream};

pub const LOGSTD_MIN: f64 = -20.0;
pub const LOGSTD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918938533204672742; // 0.5 * ln(2*pi)

/// log(1 - tanh(u)^2) without catastrophic underflow at large |u|.
#[inline]
pub fn log1m_tanh2(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Squashed Gaussian actor: shared trunk, mean head, log-std head.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub trunk_spec: MlpSpec,
    pub trunk: MlpParams,
    pub mean_w: Matrix,
    pub mean_b: Vec<f64>,
    pub logstd_w: Matrix,
    pub logstd_b: Vec<f64>,
    pub logstd_min: f64,
    pub logstd_max: f64,
}

/// Gradient container with the same layout as the policy parameters.
#[derive(Debug, Clone)]
pub struct PolicyGrads {
    pub trunk: MlpGrads,
    pub mean_w: Matrix,
    pub mean_b: Vec<f64>,
    pub logstd_w: Matrix,
    pub logstd_b: Vec<f64>,
}

impl GaussianPolicy {
    /// Orthogonal initialization: gain 1 for the trunk, 0.01 for both output
    /// heads so early log-stds stay near zero.
    pub fn init(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut RngStream,
    ) -> Result<Self> {
        let trunk_spec = MlpSpec::trunk(state_dim, hidden, Activation::Relu);
        let trunk = MlpParams::orthogonal(&trunk_spec, 1.0, rng)?;
        let h = trunk_spec.output_dim();
        Ok(GaussianPolicy {
            trunk_spec,
            trunk,
            mean_w: crate::numkit::orthogonal_init(action_dim, h, 0.01, rng)?,
            mean_b: vec![0.0; action_dim],
            logstd_w: crate::numkit::orthogonal_init(action_dim, h, 0.01, rng)?,
            logstd_b: vec![0.0; action_dim],
            logstd_min: LOGSTD_MIN,
            logstd_max: LOGSTD_MAX,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.trunk_spec.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.mean_w.rows()
    }

    /// Flat parameter views: trunk layers, then mean head, then log-std head.
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = self.trunk.slices();
        out.push(self.mean_w.as_slice());
        out.push(self.mean_b.as_slice());
        out.push(self.logstd_w.as_slice());
        out.push(self.logstd_b.as_slice());
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.trunk.slices_mut();
        out.push(self.mean_w.as_mut_slice());
        out.push(self.mean_b.as_mut_slice());
        out.push(self.logstd_w.as_mut_slice());
        out.push(self.logstd_b.as_mut_slice());
        out
    }

    pub fn is_finite(&self) -> bool {
        self.slices()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }

    pub fn grads_zeros(&self) -> PolicyGrads {
        PolicyGrads {
            trunk: MlpParams::zeros_like(&self.trunk),
            mean_w: Matrix::zeros(self.mean_w.rows(), self.mean_w.cols()),
            mean_b: vec![0.0; self.mean_b.len()],
            logstd_w: Matrix::zeros(self.logstd_w.rows(), self.logstd_w.cols()),
            logstd_b: vec![0.0; self.logstd_b.len()],
        }
    }
}

impl PolicyGrads {
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = self.trunk.slices();
        out.push(self.mean_w.as_slice());
        out.push(self.mean_b.as_slice());
        out.push(self.logstd_w.as_slice());
        out.push(self.logstd_b.as_slice());
        out
    }
}

/// Everything the backward pass needs from one stochastic forward pass.
#[derive(Debug, Clone)]
pub struct PolicySampleCache {
    pub trunk_cache: MlpCache,
    pub trunk_out: Vec<f64>,
    pub mu: Vec<f64>,
    pub raw_logstd: Vec<f64>,
    pub logstd: Vec<f64>,
    pub sigma: Vec<f64>,
    pub xi: Vec<f64>,
    pub action: Vec<f64>,
    pub log_prob: f64,
}

fn head_forward(policy: &GaussianPolicy, trunk_out: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mu = affine_forward(&policy.mean_w, &policy.mean_b, trunk_out)?;
    let raw = affine_forward(&policy.logstd_w, &policy.logstd_b, trunk_out)?;
    Ok((mu, raw))
}

/// Reparameterized sample with caller-provided noise; the rng-driven entry
/// point below wraps this, and tests use it for common-random-number checks.
pub fn policy_sample_with_noise(
    policy: &GaussianPolicy,
    state: &[f64],
    xi: &[f64],
) -> Result<(Vec<f64>, f64, PolicySampleCache)> {
    if xi.len() != policy.action_dim() {
        return Err(CoreError::dim("policy noise", policy.action_dim(), xi.len()));
    }
    let (trunk_out, trunk_cache) = mlp_forward(&policy.trunk_spec, &policy.trunk, state)?;
    let (mu, raw) = head_forward(policy, &trunk_out)?;
    let logstd: Vec<f64> = raw
        .iter()
        .map(|&v| v.clamp(policy.logstd_min, policy.logstd_max))
        .collect();
    let sigma: Vec<f64> = logstd.iter().map(|&v| v.exp()).collect();
    let mut log_prob = 0.0;
    let mut action = Vec::with_capacity(mu.len());
    for i in 0..mu.len() {
        let u = mu[i] + sigma[i] * xi[i];
        action.push(u.tanh());
        log_prob += -HALF_LN_2PI - logstd[i] - 0.5 * xi[i] * xi[i] - log1m_tanh2(u);
    }
    let cache = PolicySampleCache {
        trunk_cache,
        trunk_out,
        mu,
        raw_logstd: raw,
        logstd,
        sigma,
        xi: xi.to_vec(),
        action: action.clone(),
        log_prob,
    };
    Ok((action, log_prob, cache))
}

/// Draw an action: `tanh(mu + sigma * xi)`, `xi ~ N(0, I)`.
pub fn policy_sample(
    policy: &GaussianPolicy,
    state: &[f64],
    rng: &mut RngStream,
) -> Result<(Vec<f64>, f64, PolicySampleCache)> {
    let xi = rng.gaussian_vec(policy.action_dim());
    policy_sample_with_noise(policy, state, &xi)
}

/// Deterministic mode: `tanh(mu)`.
pub fn policy_mean_action(policy: &GaussianPolicy, state: &[f64]) -> Result<Vec<f64>> {
    let (trunk_out, _) = mlp_forward(&policy.trunk_spec, &policy.trunk, state)?;
    let (mu, _) = head_forward(policy, &trunk_out)?;
    Ok(mu.into_iter().map(|v| v.tanh()).collect())
}

/// Log-density of an arbitrary action in (-1, 1)^d under the policy.
pub fn policy_log_prob_of(policy: &GaussianPolicy, state: &[f64], action: &[f64]) -> Result<f64> {
    if action.len() != policy.action_dim() {
        return Err(CoreError::dim(
            "policy action",
            policy.action_dim(),
            action.len(),
        ));
    }
    let (trunk_out, _) = mlp_forward(&policy.trunk_spec, &policy.trunk, state)?;
    let (mu, raw) = head_forward(policy, &trunk_out)?;
    let mut lp = 0.0;
    for i in 0..mu.len() {
        let a = action[i];
        if a.abs() >= 1.0 {
            return Err(CoreError::Contract(
                "squashed action must lie strictly inside (-1, 1)".into(),
            ));
        }
        let u = a.atanh();
        let logstd = raw[i].clamp(policy.logstd_min, policy.logstd_max);
        let sigma = logstd.exp();
        let xi = (u - mu[i]) / sigma;
        lp += -HALF_LN_2PI - logstd - 0.5 * xi * xi - log1m_tanh2(u);
    }
    Ok(lp)
}

/// Pathwise vector-Jacobian product through one cached sample: gradients of
/// `action_grad . action + logp_coeff * log_prob` with respect to every
/// policy parameter, with the noise held fixed. The sigma path is excluded
/// for coordinates whose log-std sat at a clamp bound.
pub fn policy_backward(
    policy: &GaussianPolicy,
    state: &[f64],
    cache: &PolicySampleCache,
    action_grad: &[f64],
    logp_coeff: f64,
) -> Result<PolicyGrads> {
    let d = policy.action_dim();
    if action_grad.len() != d {
        return Err(CoreError::dim("policy action grad", d, action_grad.len()));
    }
    if cache.mu.len() != d || cache.trunk_out.len() != policy.trunk_spec.output_dim() {
        return Err(CoreError::Contract("stale policy cache".into()));
    }
    let mut g = policy.grads_zeros();
    let mut g_trunk_out = vec![0.0; cache.trunk_out.len()];
    for i in 0..d {
        let a = cache.action[i];
        let g_u = action_grad[i] * (1.0 - a * a) + logp_coeff * 2.0 * a;
        let g_mu = g_u;
        let clamped = cache.raw_logstd[i] <= policy.logstd_min
            || cache.raw_logstd[i] >= policy.logstd_max;
        let g_logstd = if clamped {
            0.0
        } else {
            g_u * cache.sigma[i] * cache.xi[i] - logp_coeff
        };
        axpy(g.mean_w.row_mut(i), g_mu, &cache.trunk_out);
        g.mean_b[i] += g_mu;
        axpy(g.logstd_w.row_mut(i), g_logstd, &cache.trunk_out);
        g.logstd_b[i] += g_logstd;
        axpy(&mut g_trunk_out, g_mu, policy.mean_w.row(i));
        axpy(&mut g_trunk_out, g_logstd, policy.logstd_w.row(i));
    }
    let (trunk_grads, _) = mlp_backward(
        &policy.trunk_spec,
        &policy.trunk,
        &cache.trunk_cache,
        &g_trunk_out,
    )?;
    let _ = state;
    g.trunk = trunk_grads;
    Ok(g)
}

/// Gradient of the sample's log-probability with respect to the parameters.
pub fn policy_log_prob_grad(
    policy: &GaussianPolicy,
    state: &[f64],
    cache: &PolicySampleCache,
) -> Result<PolicyGrads> {
    let zeros = vec![0.0; policy.action_dim()];
    policy_backward(policy, state, cache, &zeros, 1.0)
}

// ---------------------------------------------------------------------------
// Batched path used by the training updates.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BatchPolicyCache {
    pub trunk_cache: MlpBatchCache,
    pub trunk_out: Matrix,
    pub mu: Matrix,
    pub raw_logstd: Matrix,
    pub sigma: Matrix,
    pub xi: Matrix,
    pub actions: Matrix,
    pub log_probs: Vec<f64>,
}

/// Batched reparameterized sampling; one row per state.
pub fn policy_sample_batch(
    policy: &GaussianPolicy,
    states: &Matrix,
    rng: &mut RngStream,
) -> Result<(Matrix, Vec<f64>, BatchPolicyCache)> {
    let n = states.rows();
    let d = policy.action_dim();
    let mut xi = Matrix::zeros(n, d);
    for v in xi.as_mut_slice() {
        *v = rng.gaussian();
    }
    policy_sample_batch_with_noise(policy, states, xi)
}

pub fn policy_sample_batch_with_noise(
    policy: &GaussianPolicy,
    states: &Matrix,
    xi: Matrix,
) -> Result<(Matrix, Vec<f64>, BatchPolicyCache)> {
    let n = states.rows();
    let d = policy.action_dim();
    let (trunk_out, trunk_cache) = mlp_forward_batch(&policy.trunk_spec, &policy.trunk, states)?;
    let mu = affine_forward_batch(&trunk_out, &policy.mean_w, &policy.mean_b);
    let raw = affine_forward_batch(&trunk_out, &policy.logstd_w, &policy.logstd_b);
    let mut sigma = Matrix::zeros(n, d);
    let mut actions = Matrix::zeros(n, d);
    let mut log_probs = vec![0.0; n];
    for s in 0..n {
        let mut lp = 0.0;
        for i in 0..d {
            let logstd = raw.get(s, i).clamp(policy.logstd_min, policy.logstd_max);
            let sg = logstd.exp();
            sigma.set(s, i, sg);
            let u = mu.get(s, i) + sg * xi.get(s, i);
            actions.set(s, i, u.tanh());
            lp += -HALF_LN_2PI - logstd - 0.5 * xi.get(s, i) * xi.get(s, i) - log1m_tanh2(u);
        }
        log_probs[s] = lp;
    }
    let cache = BatchPolicyCache {
        trunk_cache,
        trunk_out,
        mu,
        raw_logstd: raw,
        sigma,
        xi,
        actions: actions.clone(),
        log_probs: log_probs.clone(),
    };
    Ok((actions, log_probs, cache))
}

/// Batched deterministic actions `tanh(mu)`; used for TD targets.
pub fn policy_mean_batch(policy: &GaussianPolicy, states: &Matrix) -> Result<Matrix> {
    let (trunk_out, _) = mlp_forward_batch(&policy.trunk_spec, &policy.trunk, states)?;
    let mut mu = affine_forward_batch(&trunk_out, &policy.mean_w, &policy.mean_b);
    for v in mu.as_mut_slice() {
        *v = v.tanh();
    }
    Ok(mu)
}

/// Batched pathwise VJP; parameter gradients are summed over rows. Row `s`
/// contributes `action_grads.row(s) . action_s + logp_coeffs[s] * logp_s`.
pub fn policy_backward_batch(
    policy: &GaussianPolicy,
    cache: &BatchPolicyCache,
    action_grads: &Matrix,
    logp_coeffs: &[f64],
) -> Result<PolicyGrads> {
    let n = cache.actions.rows();
    let d = policy.action_dim();
    if action_grads.rows() != n || action_grads.cols() != d || logp_coeffs.len() != n {
        return Err(CoreError::dim(
            "policy batch grads",
            format!("{n}x{d}"),
            format!("{}x{}", action_grads.rows(), action_grads.cols()),
        ));
    }
    let mut g = policy.grads_zeros();
    let mut g_trunk = Matrix::zeros(n, cache.trunk_out.cols());
    for s in 0..n {
        let c = logp_coeffs[s];
        let trow = cache.trunk_out.row(s);
        for i in 0..d {
            let a = cache.actions.get(s, i);
            let g_u = action_grads.get(s, i) * (1.0 - a * a) + c * 2.0 * a;
            let raw = cache.raw_logstd.get(s, i);
            let clamped = raw <= policy.logstd_min || raw >= policy.logstd_max;
            let g_logstd = if clamped {
                0.0
            } else {
                g_u * cache.sigma.get(s, i) * cache.xi.get(s, i) - c
            };
            axpy(g.mean_w.row_mut(i), g_u, trow);
            g.mean_b[i] += g_u;
            axpy(g.logstd_w.row_mut(i), g_logstd, trow);
            g.logstd_b[i] += g_logstd;
            let grow = g_trunk.row_mut(s);
            axpy(grow, g_u, policy.mean_w.row(i));
            axpy(grow, g_logstd, policy.logstd_w.row(i));
        }
    }
    let (trunk_grads, _) = mlp_backward_batch(
        &policy.trunk_spec,
        &policy.trunk,
        &cache.trunk_cache,
        &g_trunk,
        true,
        false,
    )?;
    g.trunk = trunk_grads.expect("params requested");
    Ok(g)
}
