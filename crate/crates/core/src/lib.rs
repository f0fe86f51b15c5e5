//! Stability-certified actor-critic training engine.
//!
//! The crate trains a control policy jointly with a constrained neural
//! Lyapunov critic under an adaptive certification condition, and ships a
//! verification suite that checks the certification's finite-sample bounds
//! and tracking-time guarantees against exact tabular and ODE oracles.
//!
//! Module map:
//! - [`numkit`]: dense linear algebra, deterministic RNG streams, Adam.
//! - [`nets`]: MLP with explicit backprop, squashed Gaussian policy,
//!   constrained Lyapunov critic, checkpoint byte format.
//! - [`envs`]: deterministic benchmark environments with cost functions.
//! - [`alac`]: the training loop — replay buffer, critic TD learning,
//!   Lagrangian policy updates, adaptive multipliers, evaluation.
//! - [`analysis`]: tabular MDP oracles and bound checkers for the
//!   certification's theorems, plus the tracking-time verifier and the
//!   disturbance-robustness harness.

pub mod alac;
pub mod analysis;
pub mod envs;
pub mod error;
pub mod nets;
pub mod numkit;

pub use error::{CoreError, Result};
