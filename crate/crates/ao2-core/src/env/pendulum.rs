//! Pendulum swing-up: a torque-limited pole that must be swung to the top
//! and held there. Reward is the negated squared distance from upright
//! (plus velocity and control costs), so it is always non-positive and
//! zero only at the upright rest point under zero torque.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActionMode, EnvironmentSpec, StepResult};
use crate::error::{Error, Result};

const MAX_SPEED: f64 = 8.0;
const MAX_TORQUE: f64 = 2.0;
const DT: f64 = 0.05;
const G: f64 = 10.0;
const M: f64 = 1.0;
const L: f64 = 1.0;
const MAX_STEPS: u32 = 200;
const PI: f64 = std::f64::consts::PI;

/// Maps an angle into [-pi, pi]. Matches the reference implementation's
/// `((x + pi) % (2 pi)) - pi` with a Euclidean remainder.
pub fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// One step of the pendulum dynamics under the given torque (clipped to
/// +-2). The cost is charged on the pre-step state; the angle itself is
/// left unwrapped, exactly as in the reference implementation.
pub fn pendulum_dynamics(state: [f64; 2], torque: f64) -> ([f64; 2], f64) {
    let [th, thdot] = state;
    let u = torque.clamp(-MAX_TORQUE, MAX_TORQUE);
    let costs = wrap_angle(th).powi(2) + 0.1 * thdot.powi(2) + 0.001 * u.powi(2);
    let newthdot =
        thdot + (-3.0 * G / (2.0 * L) * (th + PI).sin() + 3.0 / (M * L * L) * u) * DT;
    let newth = th + newthdot * DT;
    let newthdot = newthdot.clamp(-MAX_SPEED, MAX_SPEED);
    ([newth, newthdot], -costs)
}

/// Observation of an internal state: `[cos th, sin th, thdot]`.
pub fn pendulum_observation(state: [f64; 2]) -> Vec<f64> {
    vec![state[0].cos(), state[0].sin(), state[1]]
}

#[derive(Clone, Debug)]
pub struct Pendulum {
    state: [f64; 2],
    steps: u32,
    done: bool,
    grid: usize,
    rng: ChaCha8Rng,
}

impl Pendulum {
    pub fn new(seed: u64, action_grid: usize) -> Result<Self> {
        if action_grid < 2 {
            return Err(Error::Config(format!(
                "pendulum action grid {action_grid} must be at least 2"
            )));
        }
        Ok(Pendulum {
            state: [0.0; 2],
            steps: 0,
            done: true,
            grid: action_grid,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn spec(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            obs_dim: 3,
            action_mode: ActionMode::Continuous {
                lo: -MAX_TORQUE,
                hi: MAX_TORQUE,
                grid: self.grid,
            },
            max_steps: MAX_STEPS,
        }
    }

    pub fn state(&self) -> [f64; 2] {
        self.state
    }

    /// The angle starts uniform in [-pi, pi], the velocity in [-1, 1].
    pub fn reset(&mut self) -> Vec<f64> {
        self.state = [self.rng.gen_range(-PI..PI), self.rng.gen_range(-1.0..1.0)];
        self.steps = 0;
        self.done = false;
        pendulum_observation(self.state)
    }

    /// Episodes run exactly 200 steps; there is no early termination.
    pub fn step(&mut self, torque: f64) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let (next, reward) = pendulum_dynamics(self.state, torque);
        self.state = next;
        self.steps += 1;
        self.done = self.steps >= MAX_STEPS;
        Ok(StepResult {
            observation: pendulum_observation(self.state),
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
    fn upright_rest_is_a_zero_reward_fixed_point() {
        let ([th, thdot], reward) = pendulum_dynamics([0.0, 0.0], 0.0);
        // sin(pi) is not exactly zero in floating point; the drift is tiny.
        assert!(th.abs() < 1e-15);
        assert!(thdot.abs() < 1e-15);
        assert_eq!(reward, -0.0);
    }

    #[test]
    fn inverted_state_matches_hand_evaluation() {
        let ([_, thdot], reward) = pendulum_dynamics([PI, 0.0], 2.0);
        assert!((thdot - 0.3).abs() < 1e-12);
        assert!((reward - (-(PI * PI + 0.004))).abs() < 1e-12);
    }

    #[test]
    fn torque_is_clipped_before_the_dynamics() {
        let a = pendulum_dynamics([1.0, 1.0], 5.0);
        let b = pendulum_dynamics([1.0, 1.0], 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn reward_is_never_positive() {
        let mut env = Pendulum::new(3, 9).unwrap();
        env.reset();
        for i in 0..MAX_STEPS {
            let r = env.step(((i % 5) as f64 - 2.0) * 0.7).unwrap();
            assert!(r.reward <= 0.0);
            assert_eq!(r.done, i + 1 == MAX_STEPS);
        }
        assert!(matches!(env.step(0.0), Err(Error::EpisodeDone)));
    }

    #[test]
    fn wrap_angle_matches_reference_semantics() {
        assert_eq!(wrap_angle(PI), -PI); // the boundary folds to -pi
        assert!((wrap_angle(3.0 * PI) - (-PI)).abs() < 1e-12);
        assert!((wrap_angle(-7.5) - (-7.5 + 2.0 * PI)).abs() < 1e-12);
        assert_eq!(wrap_angle(0.5), 0.5);
    }

    #[test]
    fn free_swing_energy_drift_stays_small() {
        // Rod pivoted at one end: I = m l^2 / 3, center of mass at l/2,
        // theta measured from upright. The scheme is only first order, so
        // per-step drift is monitored against 2 percent of the m g l scale.
        let energy =
            |s: [f64; 2]| 0.5 * (M * L * L / 3.0) * s[1] * s[1] + M * G * (L / 2.0) * s[0].cos();
        let scale = M * G * L;
        let mut s = [2.0, 0.0];
        let mut prev = energy(s);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            s = pendulum_dynamics(s, 0.0).0;
            let e = energy(s);
            worst = worst.max((e - prev).abs());
            prev = e;
        }
        assert!(worst <= 0.02 * scale, "per-step drift {worst} too large");
    }
}
