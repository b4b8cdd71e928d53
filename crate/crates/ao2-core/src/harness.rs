//! Experiment runner: binds a learner to an environment, manages seeds and
//! replicas, computes evaluation-window statistics, and writes results.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::default_episodes;
use crate::env::{Action, ActionMode, Env};
use crate::error::{Error, Result};
use crate::learning::{Learner, LearnerConfig};
use crate::trace::TraceRow;

/// Full description of one experiment (all replicas).
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub env_name: String,
    pub learner: LearnerConfig,
    /// Episode budget per replica.
    pub episodes: usize,
    pub replicas: usize,
    /// Master seed; per-replica environment and learner seeds derive from it.
    pub seed: u64,
    /// Length of the consecutive-episode evaluation window.
    pub eval_window: usize,
    /// Step-window width of the learning-curve export.
    pub curve_window_steps: usize,
    /// Stop a replica once the latest evaluation window reaches this mean.
    pub early_stop_mean: Option<f64>,
    /// Whether to keep the per-step decision trace in memory.
    pub collect_trace: bool,
}

impl ExperimentConfig {
    pub fn preset(env_name: &str, learner: LearnerConfig, seed: u64) -> Result<Self> {
        Ok(ExperimentConfig {
            env_name: env_name.to_string(),
            learner,
            episodes: default_episodes(env_name)?,
            replicas: 1,
            seed,
            eval_window: 100,
            curve_window_steps: 200,
            early_stop_mean: None,
            collect_trace: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.learner.validate()?;
        if self.replicas < 1 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.eval_window == 0 || self.episodes < self.eval_window {
            return Err(Error::Config(format!(
                "episodes ({}) must cover the evaluation window ({})",
                self.episodes, self.eval_window
            )));
        }
        if self.curve_window_steps == 0 {
            return Err(Error::Config("curve_window_steps must be positive".into()));
        }
        Ok(())
    }
}

/// One point of the learning curve: mean reward over one step window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub start_step: u64,
    pub mean_reward: f64,
}

/// Everything one replica produced.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub replica: usize,
    pub env_name: String,
    pub returns: Vec<f64>,
    pub curve: Vec<CurvePoint>,
    pub pool: crate::option_graph::OptionPool,
    pub trace: Vec<TraceRow>,
    pub total_steps: u64,
    pub duration_ms: u64,
    pub best_window_mean: f64,
    pub last_window_mean: f64,
}

/// SplitMix64-style seed derivation, so every replica owns an independent,
/// reproducible stream for its environment and its learner.
pub fn derive_seed(master: u64, replica: u64, stream: u64) -> u64 {
    let mut z = master
        ^ replica.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ stream.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every replica (in parallel when more than one) and returns their
/// records ordered by replica index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    if cfg.replicas == 1 {
        return Ok(vec![run_replica(cfg, 0)?]);
    }
    (0..cfg.replicas)
        .into_par_iter()
        .map(|r| run_replica(cfg, r))
        .collect()
}

/// Runs one replica: the repeat-until-done loop over the episode budget,
/// with per-episode returns, the step-window reward curve, and optionally
/// the full decision trace.
pub fn run_replica(cfg: &ExperimentConfig, replica: usize) -> Result<RunRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let env_seed = derive_seed(cfg.seed, replica as u64, 1);
    let learner_seed = derive_seed(cfg.seed, replica as u64, 2);
    let mut env = Env::by_name(&cfg.env_name, env_seed, cfg.learner.action_grid)?;
    let mut learner_cfg = cfg.learner.clone();
    learner_cfg.seed = learner_seed;
    let mut learner = Learner::new(learner_cfg, &env.spec())?;
    let discrete = matches!(env.spec().action_mode, ActionMode::Discrete { .. });

    let mut returns = Vec::with_capacity(cfg.episodes);
    let mut trace = Vec::new();
    let mut curve = Vec::new();
    let mut curve_sum = 0.0;
    let mut curve_count = 0u64;
    let mut global_step = 0u64;
    // Rolling evaluation window for early stopping.
    let mut window_sum = 0.0;

    for episode in 0..cfg.episodes {
        let mut obs = env.reset();
        let mut reward_from_last = None;
        let mut episode_return = 0.0;
        loop {
            let decision = learner
                .step(&obs, reward_from_last, false)?
                .expect("a running episode always yields a decision");
            let action = if discrete {
                Action::Discrete(decision.action_index())
            } else {
                Action::Continuous(decision.executable)
            };
            let outcome = env.step(action)?;
            episode_return += outcome.reward;
            curve_sum += outcome.reward;
            curve_count += 1;
            if curve_count == cfg.curve_window_steps as u64 {
                curve.push(CurvePoint {
                    start_step: global_step + 1 - curve_count,
                    mean_reward: curve_sum / curve_count as f64,
                });
                curve_sum = 0.0;
                curve_count = 0;
            }
            if cfg.collect_trace {
                trace.push(TraceRow {
                    step: global_step,
                    episode: episode as u32,
                    entry: decision.path.entry().0,
                    path: decision.path.node_ids().iter().map(|id| id.0).collect(),
                    action: decision.action_index(),
                    distances: decision.distances.clone(),
                    reward: outcome.reward,
                    exploratory: decision.exploratory,
                    obs: obs.clone(),
                });
            }
            global_step += 1;
            if outcome.done {
                learner.step(&outcome.observation, Some(outcome.reward), true)?;
                break;
            }
            obs = outcome.observation;
            reward_from_last = Some(outcome.reward);
        }
        returns.push(episode_return);

        window_sum += episode_return;
        if returns.len() > cfg.eval_window {
            window_sum -= returns[returns.len() - 1 - cfg.eval_window];
        }
        if returns.len() >= cfg.eval_window {
            if let Some(target) = cfg.early_stop_mean {
                if window_sum / cfg.eval_window as f64 >= target {
                    break;
                }
            }
        }
    }

    let (best_window_mean, last_window_mean) = moving_stats(&returns, cfg.eval_window)?;
    Ok(RunRecord {
        replica,
        env_name: cfg.env_name.clone(),
        returns,
        curve,
        pool: learner.into_pool(),
        trace,
        total_steps: global_step,
        duration_ms: started.elapsed().as_millis() as u64,
        best_window_mean,
        last_window_mean,
    })
}

/// Best and final mean over every contiguous window of `window` returns.
pub fn moving_stats(returns: &[f64], window: usize) -> Result<(f64, f64)> {
    if window == 0 || returns.len() < window {
        return Err(Error::Contract(format!(
            "need at least {window} returns, got {}",
            returns.len()
        )));
    }
    let mut sum: f64 = returns[..window].iter().sum();
    let mut best = sum;
    for i in window..returns.len() {
        sum += returns[i] - returns[i - window];
        if sum > best {
            best = sum;
        }
    }
    Ok((best / window as f64, sum / window as f64))
}

/// Detects upward jumps in a windowed reward series with the default
/// smoothing width (5) and jump fraction (0.15).
pub fn phase_detect(window_means: &[f64]) -> Vec<usize> {
    phase_detect_with(window_means, 5, 0.15)
}

/// Smooths the series into non-overlapping blocks of `smooth_width` means,
/// then reports one index (into the original series) per run of adjacent
/// block pairs whose mean rises by more than `jump_fraction` of the global
/// smoothed range. Series shorter than 10 windows yield no jumps. This is
/// a diagnostic, not a learning component.
pub fn phase_detect_with(
    window_means: &[f64],
    smooth_width: usize,
    jump_fraction: f64,
) -> Vec<usize> {
    if window_means.len() < 10 || smooth_width == 0 {
        return Vec::new();
    }
    let blocks: Vec<f64> = window_means
        .chunks(smooth_width)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    if blocks.len() < 2 {
        return Vec::new();
    }
    let lo = blocks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = blocks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        return Vec::new();
    }
    let mut jumps = Vec::new();
    let mut in_run = false;
    for i in 0..blocks.len() - 1 {
        if blocks[i + 1] - blocks[i] > jump_fraction * range {
            if !in_run {
                jumps.push((i + 1) * smooth_width);
                in_run = true;
            }
        } else {
            in_run = false;
        }
    }
    jumps
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Manifest<'a> {
    created_unix_secs: u64,
    version: &'a str,
    version_hash: String,
    env: &'a str,
    seed: u64,
    config: ManifestConfig<'a>,
    replicas: Vec<ReplicaSummary>,
}

#[derive(Serialize)]
struct ManifestConfig<'a> {
    episodes: usize,
    replicas: usize,
    eval_window: usize,
    curve_window_steps: usize,
    early_stop_mean: Option<f64>,
    learner: LearnerEcho<'a>,
}

#[derive(Serialize)]
struct LearnerEcho<'a> {
    trace_length: usize,
    gamma: f64,
    accommodation_threshold: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    max_depth: usize,
    prune_every: u64,
    max_children: usize,
    keep_top_actions: usize,
    adapt_attention: bool,
    reward_ma_window: usize,
    action_grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    attention: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct ReplicaSummary {
    replica: usize,
    episodes: usize,
    total_steps: u64,
    best_window_mean: f64,
    last_window_mean: f64,
    pool_nodes: usize,
    duration_ms: u64,
}

/// Short content hash of the version string, recorded in the manifest so
/// result files can be traced back to the binary that wrote them.
pub fn version_hash(version: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(version.as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Writes per-replica result files plus one aggregate manifest:
/// `replica_NN/{returns.csv,curve.csv,trace.csv,pool.json}` and
/// `manifest.json`. Everything except the manifest timestamp is a pure
/// function of the configuration and seed.
pub fn write_outputs(cfg: &ExperimentConfig, records: &[RunRecord], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for record in records {
        let sub = dir.join(format!("replica_{:02}", record.replica));
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;

        let mut returns_csv = String::from("episode,return\n");
        for (i, r) in record.returns.iter().enumerate() {
            returns_csv.push_str(&format!("{i},{r}\n"));
        }
        let path = sub.join("returns.csv");
        std::fs::write(&path, returns_csv).map_err(|e| Error::io(&path, e))?;

        let mut curve_csv = String::from("window_start_step,mean_reward\n");
        for p in &record.curve {
            curve_csv.push_str(&format!("{},{}\n", p.start_step, p.mean_reward));
        }
        let path = sub.join("curve.csv");
        std::fs::write(&path, curve_csv).map_err(|e| Error::io(&path, e))?;

        if cfg.collect_trace {
            crate::trace::write_trace(&sub.join("trace.csv"), &record.trace)?;
        }
        record.pool.save(&sub.join("pool.json"))?;
    }

    let manifest = Manifest {
        created_unix_secs: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        version: env!("CARGO_PKG_VERSION"),
        version_hash: version_hash(env!("CARGO_PKG_VERSION")),
        env: &cfg.env_name,
        seed: cfg.seed,
        config: ManifestConfig {
            episodes: cfg.episodes,
            replicas: cfg.replicas,
            eval_window: cfg.eval_window,
            curve_window_steps: cfg.curve_window_steps,
            early_stop_mean: cfg.early_stop_mean,
            learner: LearnerEcho {
                trace_length: cfg.learner.trace_length,
                gamma: cfg.learner.gamma,
                accommodation_threshold: cfg.learner.accommodation_threshold,
                epsilon: cfg.learner.epsilon,
                alpha: cfg.learner.alpha,
                beta: cfg.learner.beta,
                max_depth: cfg.learner.max_depth,
                prune_every: cfg.learner.prune_every,
                max_children: cfg.learner.max_children,
                keep_top_actions: cfg.learner.keep_top_actions,
                adapt_attention: cfg.learner.adapt_attention,
                reward_ma_window: cfg.learner.reward_ma_window,
                action_grid: cfg.learner.action_grid,
                attention: cfg.learner.attention.as_deref(),
                note: None,
            },
        },
        replicas: records
            .iter()
            .map(|r| ReplicaSummary {
                replica: r.replica,
                episodes: r.returns.len(),
                total_steps: r.total_steps,
                best_window_mean: r.best_window_mean,
                last_window_mean: r.last_window_mean,
                pool_nodes: r.pool.len(),
                duration_ms: r.duration_ms,
            })
            .collect(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_stats_examples() {
        assert_eq!(moving_stats(&[1.0, 1.0, 1.0], 3).unwrap(), (1.0, 1.0));
        let (best, last) = moving_stats(&[0.0, 10.0, 10.0, 0.0], 2).unwrap();
        assert_eq!(best, 10.0);
        assert_eq!(last, 5.0);
        let (best, _) = moving_stats(&[3.0, 9.0, 2.0], 1).unwrap();
        assert_eq!(best, 9.0);
        assert!(moving_stats(&[1.0], 2).is_err());
    }

    #[test]
    fn phase_detect_flat_series_has_no_jumps() {
        assert!(phase_detect(&vec![2.5; 40]).is_empty());
    }

    #[test]
    fn phase_detect_finds_single_step() {
        let mut series = vec![0.0; 10];
        series.extend(vec![1.0; 10]);
        assert_eq!(phase_detect(&series), vec![10]);
    }

    #[test]
    fn phase_detect_finds_two_separated_steps() {
        let mut series = vec![0.0; 10];
        series.extend(vec![1.0; 10]);
        series.extend(vec![2.0; 10]);
        assert_eq!(phase_detect(&series), vec![10, 20]);
    }

    #[test]
    fn phase_detect_needs_ten_windows() {
        assert!(phase_detect(&[0.0, 1.0, 2.0]).is_empty());
    }

    #[test]
    fn derive_seed_separates_streams() {
        let a = derive_seed(7, 0, 1);
        let b = derive_seed(7, 0, 2);
        let c = derive_seed(7, 1, 1);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0, 1));
    }

    #[test]
    fn short_cartpole_run_is_reproducible_and_well_formed() {
        let cfg = ExperimentConfig {
            env_name: "cartpole-v0".into(),
            learner: LearnerConfig {
                epsilon: 0.1,
                ..LearnerConfig::default()
            },
            episodes: 12,
            replicas: 1,
            seed: 5,
            eval_window: 5,
            curve_window_steps: 50,
            early_stop_mean: None,
            collect_trace: true,
        };
        let a = run_replica(&cfg, 0).unwrap();
        let b = run_replica(&cfg, 0).unwrap();
        assert_eq!(a.returns, b.returns);
        assert_eq!(a.pool.to_json(), b.pool.to_json());
        assert_eq!(a.returns.len(), 12);
        assert_eq!(a.trace.len(), a.total_steps as usize);
        // Cart-pole returns equal episode lengths.
        assert_eq!(a.returns.iter().sum::<f64>(), a.total_steps as f64);
    }

    #[test]
    fn replica_results_do_not_depend_on_sibling_count() {
        let mut cfg = ExperimentConfig {
            env_name: "cartpole-v0".into(),
            learner: LearnerConfig::default(),
            episodes: 6,
            replicas: 1,
            seed: 11,
            eval_window: 3,
            curve_window_steps: 100,
            early_stop_mean: None,
            collect_trace: false,
        };
        let solo = run_experiment(&cfg).unwrap();
        cfg.replicas = 3;
        let trio = run_experiment(&cfg).unwrap();
        assert_eq!(solo[0].returns, trio[0].returns);
        assert_eq!(trio.len(), 3);
        assert_ne!(trio[0].returns, trio[1].returns);
    }
}
