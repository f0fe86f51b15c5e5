//! Constrained Lyapunov critic.
//!
//! A plain MLP `f(s, a)` is squeezed through a parameter-free scaling
//! transform tied to the displacement from the equilibrium state, and the
//! critic value is the squared norm of the result:
//!
//!   L(s, a) = || g(s) * f(s, a) ||^2,   g(s) = S / (S + eps),
//!   S = sum_i |mask_i * (s_i - s_e_i)|.
//!
//! This makes L non-negative everywhere and exactly zero at the equilibrium
//! for every action, while leaving the network's expressiveness alone. The
//! absolute values in S keep the factor from cancelling to zero away from
//! the equilibrium (a signed sum could). The mask selects which state
//! coordinates count as the certified displacement; tracking environments
//! mask down to their error coordinates.

use crate::error::{CoreError, Result};
use crate::nets::mlp::{
    mlp_backward, mlp_backward_batch, mlp_forward, mlp_forward_batch, Activation, MlpBatchCache,
    MlpCache, MlpGrads, MlpParams, MlpSpec,
};
use crate::numkit::{dot, Matrix, RngStream};

pub const DEFAULT_EPS_GS: f64 = 1e-6;

/// Scale `f_out` by `S / (S + eps)` with `S = sum |delta_s|`; exactly the
/// zero vector when `delta_s` is zero.
pub fn gs_transform(f_out: &[f64], delta_s: &[f64], eps_gs: f64) -> Vec<f64> {
    let factor = gs_factor(delta_s, eps_gs);
    if factor == 0.0 {
        return vec![0.0; f_out.len()];
    }
    f_out.iter().map(|&v| factor * v).collect()
}

#[inline]
pub fn gs_factor(delta_s: &[f64], eps_gs: f64) -> f64 {
    debug_assert!(eps_gs > 0.0);
    let s: f64 = delta_s.iter().map(|v| v.abs()).sum();
    if s == 0.0 {
        0.0
    } else {
        s / (s + eps_gs)
    }
}

/// MLP over concatenated (s, a) plus the equilibrium data for the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCritic {
    pub spec: MlpSpec,
    pub params: MlpParams,
    pub state_dim: usize,
    pub action_dim: usize,
    pub s_e: Vec<f64>,
    /// Per-coordinate weight on `s - s_e`; 1.0 selects the coordinate.
    pub cert_mask: Vec<f64>,
    pub eps_gs: f64,
}

impl LyapunovCritic {
    /// `hidden` plus the trailing output width make up the network spec,
    /// e.g. (64, 64, 16) means two hidden layers and a 16-wide f output.
    pub fn init(
        state_dim: usize,
        action_dim: usize,
        layers: &[usize],
        activation: Activation,
        s_e: Vec<f64>,
        cert_mask: Option<Vec<f64>>,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if layers.len() < 2 {
            return Err(CoreError::Contract(
                "critic needs at least one hidden layer and an output width".into(),
            ));
        }
        if s_e.len() != state_dim {
            return Err(CoreError::dim("critic equilibrium", state_dim, s_e.len()));
        }
        let (hidden, out) = layers.split_at(layers.len() - 1);
        let spec = MlpSpec::with_hidden(state_dim + action_dim, hidden, out[0], activation);
        let params = MlpParams::orthogonal(&spec, 1.0, rng)?;
        let cert_mask = cert_mask.unwrap_or_else(|| vec![1.0; state_dim]);
        if cert_mask.len() != state_dim {
            return Err(CoreError::dim("critic mask", state_dim, cert_mask.len()));
        }
        Ok(LyapunovCritic {
            spec,
            params,
            state_dim,
            action_dim,
            s_e,
            cert_mask,
            eps_gs: DEFAULT_EPS_GS,
        })
    }

    pub fn output_width(&self) -> usize {
        self.spec.output_dim()
    }

    fn delta_s(&self, state: &[f64]) -> Vec<f64> {
        state
            .iter()
            .zip(self.s_e.iter())
            .zip(self.cert_mask.iter())
            .map(|((s, e), m)| m * (s - e))
            .collect()
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        self.params.slices()
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.params.slices_mut()
    }

    pub fn is_finite(&self) -> bool {
        self.params.is_finite()
    }
}

#[derive(Debug, Clone)]
pub struct CriticCache {
    pub mlp_cache: MlpCache,
    pub f_out: Vec<f64>,
    pub factor: f64,
}

/// L(s, a) >= 0; exactly 0 at the equilibrium state.
pub fn critic_value(
    critic: &LyapunovCritic,
    state: &[f64],
    action: &[f64],
) -> Result<(f64, CriticCache)> {
    if state.len() != critic.state_dim {
        return Err(CoreError::dim("critic state", critic.state_dim, state.len()));
    }
    if action.len() != critic.action_dim {
        return Err(CoreError::dim(
            "critic action",
            critic.action_dim,
            action.len(),
        ));
    }
    let mut input = Vec::with_capacity(state.len() + action.len());
    input.extend_from_slice(state);
    input.extend_from_slice(action);
    let (f_out, mlp_cache) = mlp_forward(&critic.spec, &critic.params, &input)?;
    let factor = gs_factor(&critic.delta_s(state), critic.eps_gs);
    let value = factor * factor * dot(&f_out, &f_out);
    Ok((
        value,
        CriticCache {
            mlp_cache,
            f_out,
            factor,
        },
    ))
}

/// Gradients of `upstream * L` with respect to the network parameters and
/// the action. The transform factor carries no parameters, so everything
/// flows through `2 * factor^2 * f` into the MLP.
pub fn critic_grads(
    critic: &LyapunovCritic,
    cache: &CriticCache,
    upstream: f64,
) -> Result<(MlpGrads, Vec<f64>)> {
    let coeff = upstream * 2.0 * cache.factor * cache.factor;
    let df: Vec<f64> = cache.f_out.iter().map(|&v| coeff * v).collect();
    let (grads, input_grad) = mlp_backward(&critic.spec, &critic.params, &cache.mlp_cache, &df)?;
    let action_grad = input_grad[critic.state_dim..].to_vec();
    Ok((grads, action_grad))
}

// ---------------------------------------------------------------------------
// Batched path.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BatchCriticCache {
    pub mlp_cache: MlpBatchCache,
    pub f_out: Matrix,
    pub factors: Vec<f64>,
}

pub fn critic_value_batch(
    critic: &LyapunovCritic,
    states: &Matrix,
    actions: &Matrix,
) -> Result<(Vec<f64>, BatchCriticCache)> {
    let n = states.rows();
    if actions.rows() != n || states.cols() != critic.state_dim || actions.cols() != critic.action_dim
    {
        return Err(CoreError::dim(
            "critic batch",
            format!("{n}x{}/{}", critic.state_dim, critic.action_dim),
            format!(
                "{}x{}/{}x{}",
                states.rows(),
                states.cols(),
                actions.rows(),
                actions.cols()
            ),
        ));
    }
    let mut input = Matrix::zeros(n, critic.state_dim + critic.action_dim);
    for s in 0..n {
        let row = input.row_mut(s);
        row[..critic.state_dim].copy_from_slice(states.row(s));
        row[critic.state_dim..].copy_from_slice(actions.row(s));
    }
    let (f_out, mlp_cache) = mlp_forward_batch(&critic.spec, &critic.params, &input)?;
    let mut factors = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for s in 0..n {
        let factor = gs_factor(&critic.delta_s(states.row(s)), critic.eps_gs);
        factors.push(factor);
        let f = f_out.row(s);
        values.push(factor * factor * dot(f, f));
    }
    Ok((
        values,
        BatchCriticCache {
            mlp_cache,
            f_out,
            factors,
        },
    ))
}

/// Batched gradients; row `s` of the implicit objective is
/// `upstream[s] * L_s`. Parameter gradients sum over rows; action gradients
/// come back one row per sample when requested.
pub fn critic_backward_batch(
    critic: &LyapunovCritic,
    cache: &BatchCriticCache,
    upstream: &[f64],
    want_params: bool,
    want_actions: bool,
) -> Result<(Option<MlpGrads>, Option<Matrix>)> {
    let n = cache.f_out.rows();
    if upstream.len() != n {
        return Err(CoreError::dim("critic upstream", n, upstream.len()));
    }
    let mut df = Matrix::zeros(n, cache.f_out.cols());
    for s in 0..n {
        let coeff = upstream[s] * 2.0 * cache.factors[s] * cache.factors[s];
        let frow = cache.f_out.row(s);
        let drow = df.row_mut(s);
        for (d, &f) in drow.iter_mut().zip(frow.iter()) {
            *d = coeff * f;
        }
    }
    let (grads, input_grads) = mlp_backward_batch(
        &critic.spec,
        &critic.params,
        &cache.mlp_cache,
        &df,
        want_params,
        want_actions,
    )?;
    let action_grads = input_grads.map(|ig| {
        let mut out = Matrix::zeros(n, critic.action_dim);
        for s in 0..n {
            out.row_mut(s)
                .copy_from_slice(&ig.row(s)[critic.state_dim..]);
        }
        out
    });
    Ok((grads, action_grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_critic(seed: u64) -> LyapunovCritic {
        LyapunovCritic::init(
            3,
            2,
            &[8, 4],
            Activation::Relu,
            vec![0.0; 3],
            None,
            &mut RngStream::new(seed),
        )
        .unwrap()
    }

    #[test]
    fn gs_zero_displacement_gives_zero_vector() {
        let out = gs_transform(&[1.0, -2.0, 3.0], &[0.0, 0.0], 1e-6);
        assert_eq!(out, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn gs_at_eps_halves_the_output() {
        let eps = 1e-6;
        let out = gs_transform(&[2.0, -4.0], &[eps], eps);
        assert!((out[0] - 1.0).abs() < 1e-12);
        assert!((out[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn gs_factor_saturates_to_one() {
        let eps = 1e-6;
        let out = gs_transform(&[1.0], &[1.0], eps); // S = 1e6 * eps
        assert!((out[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gs_is_a_contraction() {
        let mut rng = RngStream::new(3);
        for _ in 0..200 {
            let f: Vec<f64> = (0..4).map(|_| rng.gaussian()).collect();
            let d: Vec<f64> = (0..3).map(|_| rng.gaussian()).collect();
            let out = gs_transform(&f, &d, 1e-6);
            let nf = dot(&f, &f).sqrt();
            let no = dot(&out, &out).sqrt();
            assert!(no <= nf + 1e-15);
        }
    }

    #[test]
    fn value_is_zero_at_equilibrium_for_any_action() {
        let critic = small_critic(7);
        let mut rng = RngStream::new(8);
        for _ in 0..100 {
            let a: Vec<f64> = (0..2).map(|_| rng.uniform() * 2.0 - 1.0).collect();
            let (v, _) = critic_value(&critic, &[0.0, 0.0, 0.0], &a).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn value_is_nonnegative_everywhere() {
        let critic = small_critic(9);
        let mut rng = RngStream::new(10);
        for _ in 0..10_000 {
            let s: Vec<f64> = (0..3).map(|_| rng.gaussian()).collect();
            let a: Vec<f64> = (0..2).map(|_| rng.gaussian()).collect();
            let (v, _) = critic_value(&critic, &s, &a).unwrap();
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn unit_f_with_saturated_factor_gives_unit_value() {
        // Zero net output replaced by hand: factor ~ 1 and ||f|| = 1 => L ~ 1.
        let critic = small_critic(11);
        let (_, cache) = critic_value(&critic, &[5.0, 5.0, 5.0], &[0.1, 0.2]).unwrap();
        let f = vec![1.0, 0.0, 0.0, 0.0];
        let l = cache.factor * cache.factor * dot(&f, &f);
        assert!((l - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grads_vanish_at_equilibrium() {
        let critic = small_critic(12);
        let (_, cache) = critic_value(&critic, &[0.0, 0.0, 0.0], &[0.3, -0.4]).unwrap();
        let (grads, ag) = critic_grads(&critic, &cache, 1.0).unwrap();
        assert!(grads.slices().iter().all(|s| s.iter().all(|&v| v == 0.0)));
        assert!(ag.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let critic = small_critic(13);
        let (_, cache) = critic_value(&critic, &[0.5, 0.1, -0.2], &[0.3, -0.4]).unwrap();
        let (grads, ag) = critic_grads(&critic, &cache, 0.0).unwrap();
        assert!(grads.slices().iter().all(|s| s.iter().all(|&v| v == 0.0)));
        assert!(ag.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mask_restricts_displacement_to_selected_coords() {
        let mut rng = RngStream::new(14);
        let critic = LyapunovCritic::init(
            3,
            1,
            &[6, 3],
            Activation::Relu,
            vec![0.0; 3],
            Some(vec![0.0, 0.0, 1.0]),
            &mut rng,
        )
        .unwrap();
        // Third coordinate at equilibrium: value must be exactly zero no
        // matter what the unmasked coordinates do.
        let (v, _) = critic_value(&critic, &[3.0, -2.0, 0.0], &[0.5]).unwrap();
        assert_eq!(v, 0.0);
        let (v2, _) = critic_value(&critic, &[3.0, -2.0, 0.1], &[0.5]).unwrap();
        assert!(v2 > 0.0);
    }

    #[test]
    fn batch_value_matches_single() {
        let critic = small_critic(15);
        let mut rng = RngStream::new(16);
        let n = 7;
        let mut states = Matrix::zeros(n, 3);
        let mut actions = Matrix::zeros(n, 2);
        for v in states.as_mut_slice() {
            *v = rng.gaussian();
        }
        for v in actions.as_mut_slice() {
            *v = rng.gaussian();
        }
        let (values, _) = critic_value_batch(&critic, &states, &actions).unwrap();
        for s in 0..n {
            let (v, _) = critic_value(&critic, states.row(s), actions.row(s)).unwrap();
            let denom = v.abs().max(1e-9);
            assert!((values[s] - v).abs() / denom < 1e-11, "{} vs {v}", values[s]);
        }
    }
}
