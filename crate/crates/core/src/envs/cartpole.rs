//! Cart-pole with a continuous force action and a quadratic cost on cart
//! displacement and pole angle.
//!
//! Dynamics are the classic frictionless cart-pole equations with the stock
//! constants (cart 1.0 kg, pole 0.1 kg, half-length 0.5 m, g = 9.8,
//! dt = 0.02 s), integrated with a semi-implicit Euler step: velocities
//! first, then positions with the new velocities. Force is continuous in
//! [-20, 20] N. The cost of a state is
//!
//!   c = (x / 10)^2 + 20 * (theta / 0.349066)^2
//!
//! with thresholds x = 10 m and theta = 20 degrees. Episodes never end
//! early; leaving the thresholds just costs more. Upright at the origin is
//! an equilibrium of the dynamics with zero force and zero cost.

use super::{Disturbance, EnvSpec, EnvState, Environment};
use crate::numkit::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct CartpoleParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole's length, per the classic convention.
    pub pole_half_length: f64,
    pub gravity: f64,
    pub dt: f64,
    pub force_limit: f64,
    pub x_threshold: f64,
    pub theta_threshold: f64,
    /// Uniform init box half-widths for (x, x_dot, theta, theta_dot).
    pub init_half_width: [f64; 4],
}

impl Default for CartpoleParams {
    fn default() -> Self {
        CartpoleParams {
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            gravity: 9.8,
            dt: 0.02,
            force_limit: 20.0,
            x_threshold: 10.0,
            theta_threshold: 20.0_f64.to_radians(),
            init_half_width: [1.0, 0.05, 0.1, 0.05],
        }
    }
}

/// Quadratic state cost; exactly zero at the upright origin.
pub fn cartpole_cost(state: &[f64], params: &CartpoleParams) -> f64 {
    let x = state[0] / params.x_threshold;
    let theta = state[2] / params.theta_threshold;
    x * x + 20.0 * theta * theta
}

/// Time derivatives (x_dot, x_ddot, theta_dot, theta_ddot) under a given
/// physical force; shared by the step and by test integrators.
pub fn cartpole_derivs(state: &[f64], force: f64, p: &CartpoleParams) -> [f64; 4] {
    let total_mass = p.cart_mass + p.pole_mass;
    let pml = p.pole_mass * p.pole_half_length;
    let theta = state[2];
    let theta_dot = state[3];
    let (sin_t, cos_t) = theta.sin_cos();
    let temp = (force + pml * theta_dot * theta_dot * sin_t) / total_mass;
    let theta_acc = (p.gravity * sin_t - cos_t * temp)
        / (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    let x_acc = temp - pml * theta_acc * cos_t / total_mass;
    [state[1], x_acc, state[3], theta_acc]
}

/// One semi-implicit Euler step. `action` is the policy-space force command
/// in (-1, 1); a disturbance adds a periodic lateral force before
/// integration. Cost is evaluated on the resulting state.
pub fn cartpole_step(
    state: &EnvState,
    action: &[f64],
    params: &CartpoleParams,
    disturbance: Option<&Disturbance>,
) -> (EnvState, f64) {
    let mut force = action[0].clamp(-1.0, 1.0) * params.force_limit;
    if let Some(d) = disturbance {
        if d.magnitude != 0.0 {
            force += d.value(state.t);
        }
    }
    let d = cartpole_derivs(&state.s, force, params);
    let (x_acc, theta_acc) = (d[1], d[3]);
    let mut s = state.s.clone();
    s[1] += params.dt * x_acc;
    s[0] += params.dt * s[1];
    s[3] += params.dt * theta_acc;
    s[2] += params.dt * s[3];
    let cost = cartpole_cost(&s, params);
    (
        EnvState {
            s,
            t: state.t + 1,
        },
        cost,
    )
}

#[derive(Debug, Clone)]
pub struct Cartpole {
    pub params: CartpoleParams,
    spec: EnvSpec,
    state: EnvState,
    disturbance: Option<Disturbance>,
}

impl Default for Cartpole {
    fn default() -> Self {
        Self::new(CartpoleParams::default(), 250)
    }
}

impl Cartpole {
    pub fn new(params: CartpoleParams, horizon: usize) -> Self {
        let spec = EnvSpec {
            state_dim: 4,
            action_dim: 1,
            horizon,
            action_bounds: vec![(-params.force_limit, params.force_limit)],
        };
        Cartpole {
            params,
            spec,
            state: EnvState {
                s: vec![0.0; 4],
                t: 0,
            },
            disturbance: None,
        }
    }
}

impl Environment for Cartpole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn name(&self) -> &str {
        "cartpole-cost"
    }

    fn equilibrium(&self) -> Vec<f64> {
        vec![0.0; 4]
    }

    fn cert_mask(&self) -> Vec<f64> {
        vec![1.0; 4]
    }

    fn reset(&mut self, rng: &mut RngStream) -> Vec<f64> {
        let hw = self.params.init_half_width;
        self.state = EnvState {
            s: (0..4).map(|i| rng.uniform_in(-hw[i], hw[i])).collect(),
            t: 0,
        };
        self.state.s.clone()
    }

    fn step(&mut self, action: &[f64]) -> (Vec<f64>, f64) {
        let (next, cost) = cartpole_step(&self.state, action, &self.params, self.disturbance.as_ref());
        self.state = next;
        (self.state.s.clone(), cost)
    }

    fn time(&self) -> usize {
        self.state.t
    }

    fn set_disturbance(&mut self, d: Option<Disturbance>) {
        self.disturbance = d;
    }

    fn box_clone(&self) -> Box<dyn Environment> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_state() -> EnvState {
        EnvState {
            s: vec![0.0; 4],
            t: 0,
        }
    }

    #[test]
    fn upright_origin_is_a_fixed_point() {
        let p = CartpoleParams::default();
        let (next, cost) = cartpole_step(&zero_state(), &[0.0], &p, None);
        assert_eq!(next.s, vec![0.0; 4]);
        assert_eq!(cost, 0.0);
        assert_eq!(next.t, 1);
    }

    #[test]
    fn cost_at_x_threshold_is_one() {
        let p = CartpoleParams::default();
        assert!((cartpole_cost(&[10.0, 0.0, 0.0, 0.0], &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cost_at_theta_threshold_is_twenty() {
        let p = CartpoleParams::default();
        let c = cartpole_cost(&[0.0, 0.0, p.theta_threshold, 0.0], &p);
        assert!((c - 20.0).abs() < 1e-12);
    }

    /// Independent fourth-order Runge-Kutta integrator over the same ODE;
    /// the Euler step must agree to within the discretization gap at dt=0.02.
    fn rk4_step(state: &[f64], force: f64, p: &CartpoleParams, dt: f64) -> Vec<f64> {
        let add = |s: &[f64], k: &[f64; 4], h: f64| -> Vec<f64> {
            s.iter().zip(k.iter()).map(|(a, b)| a + h * b).collect()
        };
        let k1 = cartpole_derivs(state, force, p);
        let k2 = cartpole_derivs(&add(state, &k1, dt / 2.0), force, p);
        let k3 = cartpole_derivs(&add(state, &k2, dt / 2.0), force, p);
        let k4 = cartpole_derivs(&add(state, &k3, dt), force, p);
        (0..4)
            .map(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    #[test]
    fn one_step_matches_rk4_oracle_within_discretization_gap() {
        let p = CartpoleParams::default();
        let start = EnvState {
            s: vec![0.0, 0.0, 0.1, 0.0],
            t: 0,
        };
        let (euler, _) = cartpole_step(&start, &[0.0], &p, None);
        let rk = rk4_step(&start.s, 0.0, &p, p.dt);
        for i in 0..4 {
            assert!(
                (euler.s[i] - rk[i]).abs() < 1e-3,
                "coord {i}: {} vs {}",
                euler.s[i],
                rk[i]
            );
        }
    }

    #[test]
    fn zero_magnitude_disturbance_is_bitwise_identical() {
        let p = CartpoleParams::default();
        let start = EnvState {
            s: vec![0.3, -0.1, 0.05, 0.2],
            t: 7,
        };
        let d = Disturbance::sine(0.0, 50);
        let (a, ca) = cartpole_step(&start, &[0.4], &p, None);
        let (b, cb) = cartpole_step(&start, &[0.4], &p, Some(&d));
        assert_eq!(a.s, b.s);
        assert_eq!(ca.to_bits(), cb.to_bits());
    }

    #[test]
    fn disturbance_changes_the_trajectory() {
        let p = CartpoleParams::default();
        let start = zero_state();
        let d = Disturbance::sine(5.0, 8);
        // At t=1 the sine is nonzero, so the second step diverges.
        let (s1, _) = cartpole_step(&start, &[0.0], &p, Some(&d));
        let (s2, _) = cartpole_step(&s1, &[0.0], &p, Some(&d));
        assert!(s2.s.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn determinism_identical_inputs_identical_outputs() {
        let p = CartpoleParams::default();
        let start = EnvState {
            s: vec![0.5, 1.0, -0.2, 0.3],
            t: 3,
        };
        let (a, ca) = cartpole_step(&start, &[-0.7], &p, None);
        let (b, cb) = cartpole_step(&start, &[-0.7], &p, None);
        assert_eq!(a, b);
        assert_eq!(ca, cb);
    }

    #[test]
    fn reset_stays_in_box_and_zero_width_box_is_center() {
        let mut env = Cartpole::default();
        let mut rng = RngStream::new(1);
        for _ in 0..10_000 {
            let s = env.reset(&mut rng);
            let hw = env.params.init_half_width;
            for i in 0..4 {
                assert!(s[i] >= -hw[i] && s[i] < hw[i]);
            }
        }
        let mut tight = Cartpole::default();
        tight.params.init_half_width = [0.0; 4];
        let s = tight.reset(&mut rng);
        assert_eq!(s, vec![0.0; 4]);
    }

    #[test]
    fn costs_are_nonnegative_along_random_rollouts() {
        let mut env = Cartpole::default();
        let mut rng = RngStream::new(2);
        env.reset(&mut rng);
        for _ in 0..250 {
            let (_, c) = env.step(&[rng.uniform() * 2.0 - 1.0]);
            assert!(c >= 0.0);
        }
    }
}
