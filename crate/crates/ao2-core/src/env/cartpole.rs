//! Cart-pole balancing: push a cart left or right to keep the pole within
//! 12 degrees and the cart within +-2.4, one reward point per step, 200
//! steps per episode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActionMode, EnvironmentSpec, StepResult};
use crate::error::{Error, Result};

const GRAVITY: f64 = 9.8;
const MASSCART: f64 = 1.0;
const MASSPOLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASSPOLE + MASSCART;
const LENGTH: f64 = 0.5; // half the pole's length
const POLEMASS_LENGTH: f64 = MASSPOLE * LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
const X_THRESHOLD: f64 = 2.4;
const MAX_STEPS: u32 = 200;

/// One explicit-Euler step of the cart-pole dynamics. Action 0 pushes
/// left, action 1 pushes right. The returned flag reports a threshold
/// crossing of the next state; the episode step cap is enforced by the
/// stateful wrapper.
pub fn cartpole_dynamics(state: [f64; 4], action: usize) -> ([f64; 4], f64, bool) {
    let [x, x_dot, theta, theta_dot] = state;
    let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
    let costheta = theta.cos();
    let sintheta = theta.sin();
    let temp = (force + POLEMASS_LENGTH * theta_dot * theta_dot * sintheta) / TOTAL_MASS;
    let thetaacc = (GRAVITY * sintheta - costheta * temp)
        / (LENGTH * (4.0 / 3.0 - MASSPOLE * costheta * costheta / TOTAL_MASS));
    let xacc = temp - POLEMASS_LENGTH * thetaacc * costheta / TOTAL_MASS;
    let next = [
        x + TAU * x_dot,
        x_dot + TAU * xacc,
        theta + TAU * theta_dot,
        theta_dot + TAU * thetaacc,
    ];
    let done = next[0] < -X_THRESHOLD
        || next[0] > X_THRESHOLD
        || next[2] < -THETA_THRESHOLD
        || next[2] > THETA_THRESHOLD;
    (next, 1.0, done)
}

#[derive(Clone, Debug)]
pub struct CartPole {
    state: [f64; 4],
    steps: u32,
    done: bool,
    rng: ChaCha8Rng,
}

impl CartPole {
    pub fn new(seed: u64) -> Self {
        CartPole {
            state: [0.0; 4],
            steps: 0,
            done: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn spec(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            obs_dim: 4,
            action_mode: ActionMode::Discrete { count: 2 },
            max_steps: MAX_STEPS,
        }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    /// Each state component starts uniform in [-0.05, 0.05].
    pub fn reset(&mut self) -> Vec<f64> {
        for c in &mut self.state {
            *c = self.rng.gen_range(-0.05..0.05);
        }
        self.steps = 0;
        self.done = false;
        self.state.to_vec()
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if action > 1 {
            return Err(Error::Contract(format!(
                "cart-pole action must be 0 or 1, got {action}"
            )));
        }
        let (next, reward, crossed) = cartpole_dynamics(self.state, action);
        self.state = next;
        self.steps += 1;
        self.done = crossed || self.steps >= MAX_STEPS;
        Ok(StepResult {
            observation: self.state.to_vec(),
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
    fn origin_push_right_matches_hand_evaluation() {
        let (next, reward, done) = cartpole_dynamics([0.0; 4], 1);
        assert_eq!(next[0], 0.0);
        assert!((next[1] - 0.19512195121951220).abs() < 1e-12);
        assert_eq!(next[2], 0.0);
        assert!((next[3] - (-0.29268292682926828)).abs() < 1e-12);
        assert_eq!(reward, 1.0);
        assert!(!done);
    }

    #[test]
    fn angle_threshold_terminates() {
        // theta already past 12 degrees stays past it after one step.
        let (_, _, done) = cartpole_dynamics([0.0, 0.0, 0.21, 0.0], 1);
        assert!(done);
    }

    #[test]
    fn step_cap_terminates_regardless_of_state() {
        let mut env = CartPole::new(5);
        env.reset();
        let mut last = None;
        for i in 0..MAX_STEPS {
            // Bang-bang around zero angle keeps the pole up long enough.
            let a = usize::from(env.state[2] + env.state[3] > 0.0);
            match env.step(a) {
                Ok(r) => {
                    if r.done {
                        last = Some((i + 1, r));
                        break;
                    }
                }
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        let (steps, r) = last.expect("episode must end within the cap");
        assert!(steps <= MAX_STEPS);
        assert_eq!(r.reward, 1.0);
        // A done episode refuses further steps.
        assert!(matches!(env.step(0), Err(Error::EpisodeDone)));
    }

    #[test]
    fn return_equals_step_count() {
        let mut env = CartPole::new(11);
        env.reset();
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            let r = env.step(steps % 2).unwrap();
            total += r.reward;
            steps += 1;
            if r.done {
                break;
            }
        }
        assert_eq!(total, steps as f64);
        assert!(steps as u32 <= MAX_STEPS);
    }
}
