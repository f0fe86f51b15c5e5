//! Function approximators: a plain MLP with an explicit backward pass, the
//! tanh-squashed Gaussian policy, and the constrained Lyapunov critic, plus
//! target-network maintenance and the checkpoint byte format.

pub mod checkpoint;
pub mod critic;
pub mod mlp;
pub mod policy;

pub use critic::{
    critic_grads, critic_value, critic_value_batch, gs_transform, LyapunovCritic,
};
pub use mlp::{
    mlp_backward, mlp_forward, mlp_forward_batch, Activation, MlpCache, MlpGrads, MlpParams,
    MlpSpec,
};
pub use policy::{
    policy_log_prob_grad, policy_mean_action, policy_sample, policy_sample_with_noise,
    GaussianPolicy, PolicyGrads,
};

use crate::error::{CoreError, Result};

/// Exponential moving average of online weights into target weights:
/// `target <- sigma * online + (1 - sigma) * target`, element-wise.
pub fn polyak_update(online: &[&[f64]], target: &mut [&mut [f64]], sigma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(CoreError::Contract(format!(
            "polyak coefficient must be in [0, 1], got {sigma}"
        )));
    }
    if online.len() != target.len() {
        return Err(CoreError::dim("polyak tensor count", online.len(), target.len()));
    }
    for (o, t) in online.iter().zip(target.iter_mut()) {
        if o.len() != t.len() {
            return Err(CoreError::dim("polyak tensor shape", o.len(), t.len()));
        }
        for (ov, tv) in o.iter().zip(t.iter_mut()) {
            *tv = sigma * ov + (1.0 - sigma) * *tv;
        }
    }
    Ok(())
}

/// Target critic and target policy parameters, shaped like the online nets.
#[derive(Debug, Clone)]
pub struct TargetPair {
    pub critic: LyapunovCritic,
    pub policy: GaussianPolicy,
}

impl TargetPair {
    /// Targets start as exact copies of the online networks.
    pub fn from_online(critic: &LyapunovCritic, policy: &GaussianPolicy) -> Self {
        TargetPair {
            critic: critic.clone(),
            policy: policy.clone(),
        }
    }

    /// Move both targets toward the online networks.
    pub fn polyak_from(
        &mut self,
        critic: &LyapunovCritic,
        policy: &GaussianPolicy,
        sigma: f64,
    ) -> Result<()> {
        polyak_update(&critic.slices(), &mut self.critic.slices_mut(), sigma)?;
        polyak_update(&policy.slices(), &mut self.policy.slices_mut(), sigma)
    }
}
