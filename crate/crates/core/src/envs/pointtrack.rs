//! Planar point mass tracking a circular reference.
//!
//! The action commands a planar velocity (norm-clamped to the velocity
//! limit); the position integrates it while the reference advances along a
//! circle at a fixed angular rate. Cost is the Euclidean distance between
//! position and reference after the step.
//!
//! The observation is `[pos(2), vel(2), ref(2), err(2)]` with
//! `err = pos - ref`. Only the error coordinates enter the critic's
//! certified displacement (see `cert_mask`), so the displacement vanishes
//! exactly when tracking is perfect even though the absolute coordinates
//! keep moving along the circle.

use super::{Disturbance, EnvSpec, EnvState, Environment};
use crate::numkit::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct PointTrackParams {
    /// Circle radius in meters.
    pub radius: f64,
    /// Reference angular rate in radians per step.
    pub angular_rate: f64,
    /// Commanded-velocity norm limit in meters per second.
    pub velocity_limit: f64,
    pub dt: f64,
    /// Init box half-width around the reference start, per position axis.
    pub init_half_width: f64,
}

impl Default for PointTrackParams {
    fn default() -> Self {
        PointTrackParams {
            radius: 1.0,
            // One full circle per 65-step episode.
            angular_rate: std::f64::consts::TAU / 65.0,
            velocity_limit: 0.3,
            dt: 1.0,
            init_half_width: 0.2,
        }
    }
}

impl PointTrackParams {
    /// Reference point at step `t`; always exactly on the circle.
    pub fn reference(&self, t: usize) -> [f64; 2] {
        let phase = self.angular_rate * t as f64;
        [self.radius * phase.cos(), self.radius * phase.sin()]
    }
}

fn pack_state(pos: [f64; 2], vel: [f64; 2], reference: [f64; 2]) -> Vec<f64> {
    vec![
        pos[0],
        pos[1],
        vel[0],
        vel[1],
        reference[0],
        reference[1],
        pos[0] - reference[0],
        pos[1] - reference[1],
    ]
}

/// One tracking step. `action` is the policy-space velocity command in
/// (-1, 1)^2, scaled by the velocity limit and then norm-clamped; an
/// optional disturbance drifts the applied velocity along x.
pub fn pointtrack_step(
    state: &EnvState,
    action: &[f64],
    params: &PointTrackParams,
    disturbance: Option<&Disturbance>,
) -> (EnvState, f64) {
    let mut v = [
        action[0].clamp(-1.0, 1.0) * params.velocity_limit,
        action[1].clamp(-1.0, 1.0) * params.velocity_limit,
    ];
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if norm > params.velocity_limit {
        let scale = params.velocity_limit / norm;
        v[0] *= scale;
        v[1] *= scale;
    }
    if let Some(d) = disturbance {
        if d.magnitude != 0.0 {
            v[0] += d.value(state.t);
        }
    }
    let pos = [
        state.s[0] + v[0] * params.dt,
        state.s[1] + v[1] * params.dt,
    ];
    let t = state.t + 1;
    let reference = params.reference(t);
    let err = [pos[0] - reference[0], pos[1] - reference[1]];
    let cost = (err[0] * err[0] + err[1] * err[1]).sqrt();
    (
        EnvState {
            s: pack_state(pos, v, reference),
            t,
        },
        cost,
    )
}

#[derive(Debug, Clone)]
pub struct PointTrack {
    pub params: PointTrackParams,
    spec: EnvSpec,
    state: EnvState,
    disturbance: Option<Disturbance>,
}

impl Default for PointTrack {
    fn default() -> Self {
        Self::new(PointTrackParams::default(), 65)
    }
}

impl PointTrack {
    pub fn new(params: PointTrackParams, horizon: usize) -> Self {
        let vl = params.velocity_limit;
        let spec = EnvSpec {
            state_dim: 8,
            action_dim: 2,
            horizon,
            action_bounds: vec![(-vl, vl); 2],
        };
        let start = params.reference(0);
        PointTrack {
            params,
            spec,
            state: EnvState {
                s: pack_state(start, [0.0; 2], start),
                t: 0,
            },
            disturbance: None,
        }
    }
}

impl Environment for PointTrack {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn name(&self) -> &str {
        "point-circle-cost"
    }

    fn equilibrium(&self) -> Vec<f64> {
        // Zero tracking error; the unmasked coordinates record the canonical
        // start-of-circle pose for reference.
        let start = self.params.reference(0);
        let next = self.params.reference(1);
        let vel = [
            (next[0] - start[0]) / self.params.dt,
            (next[1] - start[1]) / self.params.dt,
        ];
        pack_state(start, vel, start)
    }

    fn cert_mask(&self) -> Vec<f64> {
        // Only the error coordinates certify stability.
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]
    }

    fn reset(&mut self, rng: &mut RngStream) -> Vec<f64> {
        let start = self.params.reference(0);
        let hw = self.params.init_half_width;
        let pos = [
            start[0] + rng.uniform_in(-hw, hw),
            start[1] + rng.uniform_in(-hw, hw),
        ];
        self.state = EnvState {
            s: pack_state(pos, [0.0; 2], start),
            t: 0,
        };
        self.state.s.clone()
    }

    fn step(&mut self, action: &[f64]) -> (Vec<f64>, f64) {
        let (next, cost) =
            pointtrack_step(&self.state, action, &self.params, self.disturbance.as_ref());
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

    #[test]
    fn perfect_tracking_keeps_cost_at_zero() {
        let p = PointTrackParams::default();
        let mut state = EnvState {
            s: pack_state(p.reference(0), [0.0; 2], p.reference(0)),
            t: 0,
        };
        for _ in 0..65 {
            let target = p.reference(state.t + 1);
            // Exact velocity that lands on the next reference point.
            let v = [
                (target[0] - state.s[0]) / p.dt / p.velocity_limit,
                (target[1] - state.s[1]) / p.dt / p.velocity_limit,
            ];
            assert!(v[0].abs() <= 1.0 && v[1].abs() <= 1.0, "ref must be catchable");
            let (next, cost) = pointtrack_step(&state, &v, &p, None);
            assert!(cost < 1e-12, "cost {cost}");
            state = next;
        }
    }

    #[test]
    fn cost_from_circle_center_is_the_radius() {
        let p = PointTrackParams::default();
        // Position the point so that after a zero step it sits at the center.
        let state = EnvState {
            s: pack_state([0.0, 0.0], [0.0; 2], p.reference(0)),
            t: 0,
        };
        let (_, cost) = pointtrack_step(&state, &[0.0, 0.0], &p, None);
        // Reference is on the unit circle, position at the center.
        assert!((cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn per_step_cost_matches_hypot_oracle() {
        let p = PointTrackParams::default();
        let mut rng = RngStream::new(9);
        let mut state = EnvState {
            s: pack_state(p.reference(0), [0.0; 2], p.reference(0)),
            t: 0,
        };
        for _ in 0..65 {
            let a = [rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0];
            let (next, cost) = pointtrack_step(&state, &a, &p, None);
            let reference = p.reference(next.t);
            let oracle = (next.s[0] - reference[0]).hypot(next.s[1] - reference[1]);
            assert!((cost - oracle).abs() < 1e-12);
            // Error coordinates mirror position minus reference.
            assert!((next.s[6] - (next.s[0] - reference[0])).abs() < 1e-15);
            assert!((next.s[7] - (next.s[1] - reference[1])).abs() < 1e-15);
            state = next;
        }
    }

    #[test]
    fn equilibrium_has_zero_error_coordinates() {
        let env = PointTrack::default();
        let eq = env.equilibrium();
        assert_eq!(eq[6], 0.0);
        assert_eq!(eq[7], 0.0);
        let mask = env.cert_mask();
        assert_eq!(mask.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn velocity_norm_is_clamped() {
        let p = PointTrackParams::default();
        let state = EnvState {
            s: pack_state([0.0, 0.0], [0.0; 2], p.reference(0)),
            t: 0,
        };
        let (next, _) = pointtrack_step(&state, &[1.0, 1.0], &p, None);
        let speed = (next.s[2].powi(2) + next.s[3].powi(2)).sqrt();
        assert!(speed <= p.velocity_limit + 1e-12);
    }

    #[test]
    fn reset_positions_land_near_the_reference_start() {
        let mut env = PointTrack::default();
        let mut rng = RngStream::new(4);
        for _ in 0..1000 {
            let s = env.reset(&mut rng);
            let start = env.params.reference(0);
            assert!((s[0] - start[0]).abs() < 0.2 + 1e-12);
            assert!((s[1] - start[1]).abs() < 0.2 + 1e-12);
        }
    }
}
