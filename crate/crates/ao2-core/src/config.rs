//! Flat key-value run configuration file (TOML).
//!
//! Every key is optional; omitted keys fall back to the learner defaults
//! and to per-environment experiment defaults. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;
use crate::learning::LearnerConfig;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFileConfig {
    // Learner keys.
    pub trace_length: Option<usize>,
    pub gamma: Option<f64>,
    pub accommodation_threshold: Option<f64>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub max_depth: Option<usize>,
    pub prune_every: Option<u64>,
    pub max_children: Option<usize>,
    pub keep_top_actions: Option<usize>,
    pub seed: Option<u64>,
    pub adapt_attention: Option<bool>,
    pub reward_ma_window: Option<usize>,
    pub action_grid: Option<usize>,
    pub attention: Option<Vec<f64>>,
    // Experiment keys.
    pub episodes: Option<usize>,
    pub replicas: Option<usize>,
    pub eval_window: Option<usize>,
    pub curve_window_steps: Option<usize>,
    pub early_stop_mean: Option<f64>,
}

impl RunFileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn learner_config(&self) -> LearnerConfig {
        let d = LearnerConfig::default();
        LearnerConfig {
            trace_length: self.trace_length.unwrap_or(d.trace_length),
            gamma: self.gamma.unwrap_or(d.gamma),
            accommodation_threshold: self
                .accommodation_threshold
                .unwrap_or(d.accommodation_threshold),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            max_depth: self.max_depth.unwrap_or(d.max_depth),
            prune_every: self.prune_every.unwrap_or(d.prune_every),
            max_children: self.max_children.unwrap_or(d.max_children),
            keep_top_actions: self.keep_top_actions.unwrap_or(d.keep_top_actions),
            seed: self.seed.unwrap_or(d.seed),
            adapt_attention: self.adapt_attention.unwrap_or(d.adapt_attention),
            reward_ma_window: self.reward_ma_window.unwrap_or(d.reward_ma_window),
            action_grid: self.action_grid.unwrap_or(d.action_grid),
            attention: self.attention.clone(),
        }
    }

    /// Assembles the full experiment configuration, filling episode budgets
    /// from the per-environment defaults.
    pub fn experiment(&self, env_name: &str) -> Result<ExperimentConfig> {
        let episodes = self.episodes.unwrap_or(default_episodes(env_name)?);
        let cfg = ExperimentConfig {
            env_name: env_name.to_string(),
            learner: self.learner_config(),
            episodes,
            replicas: self.replicas.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            eval_window: self.eval_window.unwrap_or(100),
            curve_window_steps: self.curve_window_steps.unwrap_or(200),
            early_stop_mean: self.early_stop_mean,
            collect_trace: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Default training budgets, sized to finish in minutes on a desktop CPU.
pub fn default_episodes(env_name: &str) -> Result<usize> {
    match env_name {
        "cartpole-v0" => Ok(2000),
        "pendulum-v0" => Ok(3000),
        "acrobot-v1" => Ok(3000),
        other => Err(Error::UnknownEnvironment(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys_and_fills_defaults() {
        let text = "trace_length = 18\ngamma = 0.95\nepsilon = 0.1\nseed = 7\n";
        let cfg: RunFileConfig = toml::from_str(text).unwrap();
        let learner = cfg.learner_config();
        assert_eq!(learner.trace_length, 18);
        assert_eq!(learner.gamma, 0.95);
        assert_eq!(learner.epsilon, 0.1);
        assert_eq!(learner.seed, 7);
        assert_eq!(learner.max_depth, 8); // default
        let exp = cfg.experiment("pendulum-v0").unwrap();
        assert_eq!(exp.episodes, 3000);
        assert_eq!(exp.eval_window, 100);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = "trace_legnth = 18\n";
        assert!(toml::from_str::<RunFileConfig>(text).is_err());
    }
}
