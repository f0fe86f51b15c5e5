//! Deterministic discrete-time environments with cost functions, equilibrium
//! points, and periodic disturbance injection.
//!
//! Policies always emit actions in (-1, 1) per dimension; each environment
//! scales them to its physical bounds internally. Episodes end only at the
//! horizon; states outside nominal thresholds are allowed and simply cost
//! more.

pub mod cartpole;
pub mod lintrack;
pub mod pointtrack;

pub use cartpole::{cartpole_cost, cartpole_step, Cartpole, CartpoleParams};
pub use lintrack::{lintrack_step, LinTrack, LinTrackParams};
pub use pointtrack::{pointtrack_step, PointTrack, PointTrackParams};

use crate::error::{CoreError, Result};
use crate::numkit::RngStream;

/// Static facts about an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_dim: usize,
    /// Steps per episode; the only termination condition.
    pub horizon: usize,
    /// Physical action bounds per dimension, after scaling from (-1, 1).
    pub action_bounds: Vec<(f64, f64)>,
}

/// Environment-local state: the observation vector plus the step index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub s: Vec<f64>,
    pub t: usize,
}

/// Periodic external forcing injected before integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub magnitude: f64,
    /// Period in steps.
    pub period: usize,
    pub waveform: Waveform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Waveform {
    Sine,
    Square,
}

impl Disturbance {
    pub fn sine(magnitude: f64, period: usize) -> Self {
        Disturbance {
            magnitude,
            period,
            waveform: Waveform::Sine,
        }
    }

    /// Forcing value at step `t`. Zero magnitude contributes exactly nothing;
    /// callers skip the addition entirely in that case so the clean dynamics
    /// stay bitwise identical.
    pub fn value(&self, t: usize) -> f64 {
        if self.magnitude == 0.0 {
            return 0.0;
        }
        let phase = std::f64::consts::TAU * (t % self.period) as f64 / self.period as f64;
        match self.waveform {
            Waveform::Sine => self.magnitude * phase.sin(),
            Waveform::Square => {
                if (t % self.period) * 2 < self.period {
                    self.magnitude
                } else {
                    -self.magnitude
                }
            }
        }
    }
}

/// Common surface for the training loop, evaluation, and the robustness
/// harness. Instances own their episode state; run one per worker.
pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;
    fn name(&self) -> &str;
    /// The equilibrium state used by the critic's displacement transform.
    fn equilibrium(&self) -> Vec<f64>;
    /// Per-coordinate weights on `s - s_e` for the certified displacement;
    /// tracking environments select their error coordinates here.
    fn cert_mask(&self) -> Vec<f64>;
    /// Draw a starting state uniformly from the documented init box; t = 0.
    fn reset(&mut self, rng: &mut RngStream) -> Vec<f64>;
    /// Advance one step with a policy-space action in (-1, 1)^d.
    fn step(&mut self, action: &[f64]) -> (Vec<f64>, f64);
    /// Step index within the current episode.
    fn time(&self) -> usize;
    fn set_disturbance(&mut self, d: Option<Disturbance>);
    fn box_clone(&self) -> Box<dyn Environment>;
}

impl Clone for Box<dyn Environment> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// Environment registry keyed by name.
pub fn make_env(name: &str) -> Result<Box<dyn Environment>> {
    match name {
        "cartpole-cost" => Ok(Box::new(Cartpole::default())),
        "point-circle-cost" => Ok(Box::new(PointTrack::default())),
        "lintrack" => Ok(Box::new(LinTrack::default())),
        other => Err(CoreError::Contract(format!(
            "unknown environment '{other}' (known: cartpole-cost, point-circle-cost, lintrack)"
        ))),
    }
}

pub fn env_names() -> &'static [&'static str] {
    &["cartpole-cost", "point-circle-cost", "lintrack"]
}
