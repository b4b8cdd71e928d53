//! Native classic-control environments with the reference dynamics,
//! rewards, and termination rules, plus the discretization bridge between
//! the learner's discrete action leaves and continuous control ranges.
//!
//! Dynamics are pinned against a frozen transition table generated from the
//! public reference implementations; only the dynamics are bit-matched,
//! initial-state distributions are matched in law with a seeded ChaCha8
//! generator.

mod acrobot;
mod cartpole;
pub mod oracle;
mod pendulum;

pub use acrobot::{acrobot_dynamics, Acrobot};
pub use cartpole::{cartpole_dynamics, CartPole};
pub use pendulum::{pendulum_dynamics, Pendulum};

use crate::error::{Error, Result};

/// How actions are delivered to an environment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActionMode {
    Discrete {
        count: usize,
    },
    /// A real-valued control in `[lo, hi]`, reached through an evenly
    /// spaced grid of `grid` levels.
    Continuous {
        lo: f64,
        hi: f64,
        grid: usize,
    },
}

impl ActionMode {
    /// Number of primitive actions the learner can emit.
    pub fn action_count(&self) -> usize {
        match *self {
            ActionMode::Discrete { count } => count,
            ActionMode::Continuous { grid, .. } => grid,
        }
    }
}

/// Static description of an environment's interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvironmentSpec {
    pub obs_dim: usize,
    pub action_mode: ActionMode,
    pub max_steps: u32,
}

/// One transition record.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub steps_elapsed: u32,
}

/// Action handed to `Env::step`: the leaf index for discrete environments,
/// the executable control value for continuous ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(f64),
}

/// Maps a grid index onto the continuous range: `lo + i * (hi - lo) / (k - 1)`,
/// an evenly spaced grid including both endpoints.
pub fn discretize_action(index: usize, lo: f64, hi: f64, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Config(format!("action grid {k} must be at least 2")));
    }
    if index >= k {
        return Err(Error::Contract(format!(
            "grid index {index} out of range for {k} levels"
        )));
    }
    Ok(lo + index as f64 * (hi - lo) / (k - 1) as f64)
}

/// One of the three supported environments behind a uniform interface.
#[derive(Clone, Debug)]
pub enum Env {
    CartPole(CartPole),
    Pendulum(Pendulum),
    Acrobot(Acrobot),
}

impl Env {
    /// Environment selection by name. `action_grid` sets the grid
    /// resolution of continuous environments and is ignored by discrete
    /// ones.
    pub fn by_name(name: &str, seed: u64, action_grid: usize) -> Result<Env> {
        match name {
            "cartpole-v0" => Ok(Env::CartPole(CartPole::new(seed))),
            "pendulum-v0" => Ok(Env::Pendulum(Pendulum::new(seed, action_grid)?)),
            "acrobot-v1" => Ok(Env::Acrobot(Acrobot::new(seed))),
            other => Err(Error::UnknownEnvironment(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Env::CartPole(_) => "cartpole-v0",
            Env::Pendulum(_) => "pendulum-v0",
            Env::Acrobot(_) => "acrobot-v1",
        }
    }

    pub fn spec(&self) -> EnvironmentSpec {
        match self {
            Env::CartPole(e) => e.spec(),
            Env::Pendulum(e) => e.spec(),
            Env::Acrobot(e) => e.spec(),
        }
    }

    /// Draws a fresh initial state and returns its observation.
    pub fn reset(&mut self) -> Vec<f64> {
        match self {
            Env::CartPole(e) => e.reset(),
            Env::Pendulum(e) => e.reset(),
            Env::Acrobot(e) => e.reset(),
        }
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        match (self, action) {
            (Env::CartPole(e), Action::Discrete(a)) => e.step(a),
            (Env::Acrobot(e), Action::Discrete(a)) => e.step(a),
            (Env::Pendulum(e), Action::Continuous(u)) => e.step(u),
            (env, action) => Err(Error::Contract(format!(
                "{} cannot execute {action:?}",
                env.name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_endpoints_and_midpoint() {
        assert_eq!(discretize_action(4, -2.0, 2.0, 9).unwrap(), 0.0);
        assert_eq!(discretize_action(0, -2.0, 2.0, 9).unwrap(), -2.0);
        assert_eq!(discretize_action(8, -2.0, 2.0, 9).unwrap(), 2.0);
        assert_eq!(discretize_action(6, -2.0, 2.0, 9).unwrap(), 1.0);
    }

    #[test]
    fn grid_rejects_out_of_range_index() {
        assert!(discretize_action(9, -2.0, 2.0, 9).is_err());
        assert!(discretize_action(0, -2.0, 2.0, 1).is_err());
    }

    #[test]
    fn names_resolve_and_unknown_is_rejected() {
        for name in ["cartpole-v0", "pendulum-v0", "acrobot-v1"] {
            let env = Env::by_name(name, 0, 9).unwrap();
            assert_eq!(env.name(), name);
        }
        assert!(matches!(
            Env::by_name("mountaincar-v0", 0, 9),
            Err(Error::UnknownEnvironment(_))
        ));
    }

    #[test]
    fn identical_seeds_give_identical_trajectories() {
        for name in ["cartpole-v0", "pendulum-v0", "acrobot-v1"] {
            let mut a = Env::by_name(name, 99, 9).unwrap();
            let mut b = Env::by_name(name, 99, 9).unwrap();
            let (oa, ob) = (a.reset(), b.reset());
            assert_eq!(oa, ob);
            let act = match a.spec().action_mode {
                ActionMode::Discrete { .. } => Action::Discrete(0),
                ActionMode::Continuous { .. } => Action::Continuous(1.5),
            };
            for _ in 0..50 {
                let ra = a.step(act).unwrap();
                let rb = b.step(act).unwrap();
                assert_eq!(ra, rb);
                if ra.done {
                    break;
                }
            }
        }
    }
}
