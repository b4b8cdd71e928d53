//! Acrobot swing-up: two links hanging from a fixed joint, torque applied
//! only at the joint between them. Each step costs one reward point until
//! the tip of the lower link crosses the horizontal line one length above
//! the pivot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActionMode, EnvironmentSpec, StepResult};
use crate::error::{Error, Result};

const DT: f64 = 0.2;
const LINK_LENGTH_1: f64 = 1.0;
const LINK_MASS_1: f64 = 1.0;
const LINK_MASS_2: f64 = 1.0;
const LINK_COM_POS_1: f64 = 0.5;
const LINK_COM_POS_2: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const GRAVITY: f64 = 9.8;
const PI: f64 = std::f64::consts::PI;
const MAX_VEL_1: f64 = 4.0 * PI;
const MAX_VEL_2: f64 = 9.0 * PI;
const AVAIL_TORQUE: [f64; 3] = [-1.0, 0.0, 1.0];
const MAX_STEPS: u32 = 500;

/// Joint-space equations of motion of the two-link system, over the
/// augmented state (theta1, theta2, dtheta1, dtheta2, torque).
fn derivatives(s: [f64; 5]) -> [f64; 5] {
    let m1 = LINK_MASS_1;
    let m2 = LINK_MASS_2;
    let l1 = LINK_LENGTH_1;
    let lc1 = LINK_COM_POS_1;
    let lc2 = LINK_COM_POS_2;
    let i1 = LINK_MOI;
    let i2 = LINK_MOI;
    let g = GRAVITY;
    let [theta1, theta2, dtheta1, dtheta2, a] = s;
    let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
    let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
        + phi2;
    let ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin() - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    [dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0]
}

/// Classic fourth-order Runge-Kutta over one dt.
fn rk4_step(y0: [f64; 5], dt: f64) -> [f64; 5] {
    let add = |y: [f64; 5], k: [f64; 5], h: f64| {
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = y[i] + h * k[i];
        }
        out
    };
    let dt2 = dt / 2.0;
    let k1 = derivatives(y0);
    let k2 = derivatives(add(y0, k1, dt2));
    let k3 = derivatives(add(y0, k2, dt2));
    let k4 = derivatives(add(y0, k3, dt));
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Repeated-subtraction angle wrap, matching the reference implementation
/// including its boundary behavior.
fn wrap(mut x: f64, m: f64, max: f64) -> f64 {
    let diff = max - m;
    while x > max {
        x -= diff;
    }
    while x < m {
        x += diff;
    }
    x
}

/// One environment step from an explicit state. Actions 0, 1, 2 apply
/// torques -1, 0, +1. Returns (next state, reward, terminal).
pub fn acrobot_dynamics(state: [f64; 4], action: usize) -> ([f64; 4], f64, bool) {
    let torque = AVAIL_TORQUE[action];
    let augmented = [state[0], state[1], state[2], state[3], torque];
    let ns = rk4_step(augmented, DT);
    let next = [
        wrap(ns[0], -PI, PI),
        wrap(ns[1], -PI, PI),
        ns[2].clamp(-MAX_VEL_1, MAX_VEL_1),
        ns[3].clamp(-MAX_VEL_2, MAX_VEL_2),
    ];
    let terminal = -next[0].cos() - (next[1] + next[0]).cos() > 1.0;
    let reward = if terminal { 0.0 } else { -1.0 };
    (next, reward, terminal)
}

/// Observation of an internal state:
/// `[cos t1, sin t1, cos t2, sin t2, dt1, dt2]`.
pub fn acrobot_observation(state: [f64; 4]) -> Vec<f64> {
    vec![
        state[0].cos(),
        state[0].sin(),
        state[1].cos(),
        state[1].sin(),
        state[2],
        state[3],
    ]
}

#[derive(Clone, Debug)]
pub struct Acrobot {
    state: [f64; 4],
    steps: u32,
    done: bool,
    rng: ChaCha8Rng,
}

impl Acrobot {
    pub fn new(seed: u64) -> Self {
        Acrobot {
            state: [0.0; 4],
            steps: 0,
            done: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn spec(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            obs_dim: 6,
            action_mode: ActionMode::Discrete { count: 3 },
            max_steps: MAX_STEPS,
        }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    /// Each state component starts uniform in [-0.1, 0.1].
    pub fn reset(&mut self) -> Vec<f64> {
        for c in &mut self.state {
            *c = self.rng.gen_range(-0.1..0.1);
        }
        self.steps = 0;
        self.done = false;
        acrobot_observation(self.state)
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if action > 2 {
            return Err(Error::Contract(format!(
                "acrobot action must be 0, 1 or 2, got {action}"
            )));
        }
        let (next, reward, terminal) = acrobot_dynamics(self.state, action);
        self.state = next;
        self.steps += 1;
        self.done = terminal || self.steps >= MAX_STEPS;
        Ok(StepResult {
            observation: acrobot_observation(self.state),
            reward,
            done: self.done,
            steps_elapsed: self.steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hanging_rest_is_not_terminal() {
        let (_, reward, done) = acrobot_dynamics([0.0; 4], 1);
        assert_eq!(reward, -1.0);
        assert!(!done);
    }

    #[test]
    fn fully_inverted_is_terminal_with_zero_reward() {
        // Starting inverted and applying no torque, the tip stays above
        // the line after one step: -cos(t1) - cos(t2 + t1) stays > 1.
        let (next, reward, done) = acrobot_dynamics([PI, 0.0, 0.0, 0.0], 1);
        assert!(-next[0].cos() - (next[1] + next[0]).cos() > 1.0);
        assert_eq!(reward, 0.0);
        assert!(done);
    }

    #[test]
    fn every_non_terminal_step_costs_one() {
        let mut env = Acrobot::new(17);
        env.reset();
        let mut total = 0.0;
        let mut steps = 0u32;
        loop {
            let r = env.step((steps % 3) as usize).unwrap();
            total += r.reward;
            steps += 1;
            if r.done {
                assert!(r.reward == 0.0 || steps == MAX_STEPS);
                break;
            }
            assert_eq!(r.reward, -1.0);
        }
        assert!((-(steps as f64)..=0.0).contains(&total));
        assert!(matches!(env.step(0), Err(Error::EpisodeDone)));
    }

    #[test]
    fn velocities_stay_bounded() {
        let mut s = [0.1, -0.1, 2.0, -3.0];
        for i in 0..300 {
            s = acrobot_dynamics(s, (i % 3) as usize).0;
            assert!(s[2].abs() <= MAX_VEL_1);
            assert!(s[3].abs() <= MAX_VEL_2);
            assert!(s[0].abs() <= PI && s[1].abs() <= PI);
        }
    }
}
