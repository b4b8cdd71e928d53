//! The learning process: accommodation (structure growth when no existing
//! node is similar enough), assimilation (trace-discounted weight updates),
//! attention-weight adaptation, and the learner that runs one full
//! perceive-act-learn cycle per environment step.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{ActionMode, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::inference::{
    epsilon_greedy, select_action_with, smooth_action, DecisionPath, Traversal,
};
use crate::option_graph::{
    distance, similarity_score, AttentionWeights, NodeId, NodeKind, OptionPool,
};

/// One remembered decision: the path taken and, once known, the reward the
/// environment returned for it.
#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub path: DecisionPath,
    pub reward: Option<f64>,
}

/// Sliding window of the most recent decision paths. Each incoming reward
/// is propagated over the whole window with geometric age discounting, which
/// is what lets delayed rewards credit earlier decisions.
#[derive(Clone, Debug)]
pub struct TraceBuffer {
    entries: VecDeque<TraceEntry>,
    capacity: usize,
}

impl TraceBuffer {
    pub fn new(trace_length: usize) -> Result<Self> {
        if trace_length == 0 {
            return Err(Error::Config("trace length must be at least 1".into()));
        }
        Ok(TraceBuffer {
            entries: VecDeque::with_capacity(trace_length + 1),
            capacity: trace_length,
        })
    }

    /// Remembers a freshly taken path as the newest entry, dropping the
    /// oldest entry beyond the trace length.
    pub fn push(&mut self, path: DecisionPath) {
        self.entries.push_front(TraceEntry { path, reward: None });
        while self.entries.len() > self.capacity {
            self.entries.pop_back();
        }
    }

    /// Attaches the reward that the newest path earned.
    pub fn set_newest_reward(&mut self, reward: f64) {
        if let Some(front) = self.entries.front_mut() {
            front.reward = Some(reward);
        }
    }

    pub fn newest_reward(&self) -> Option<f64> {
        self.entries.front().and_then(|e| e.reward)
    }

    /// Entries newest first (age 0 first).
    pub fn iter(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Traces do not cross episode boundaries.
    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

/// Assimilation: the newest reward in the buffer is credited to every edge
/// of every buffered path, scaled by `gamma^age` (age 0 is the newest path).
/// Edges removed by memory cleansing since the path was recorded are
/// skipped silently.
pub fn apply_rewards(buffer: &TraceBuffer, pool: &mut OptionPool, gamma: f64) {
    let Some(reward) = buffer.newest_reward() else {
        return;
    };
    let mut c = 1.0;
    for entry in buffer.iter() {
        for step in &entry.path.steps {
            pool.add_weight(step.node, step.child, c * reward);
        }
        c *= gamma;
    }
}

/// Accommodation: when neither the selected node nor any of its interior
/// children is similar enough to the observation, a new interior node is
/// created with the observation as its value, wired to every action leaf
/// (weight 0) and added as a child of the selected node (weight 0).
/// Returns the new node's id, or None when an existing node already covers
/// the situation.
pub fn accommodate(
    pool: &mut OptionPool,
    selected: NodeId,
    obs: &[f64],
    w: &AttentionWeights,
    threshold: f64,
) -> Result<Option<NodeId>> {
    let node = pool.node(selected)?;
    if !node.kind.is_interior() {
        return Err(Error::NotInterior(selected));
    }
    if similarity_score(obs, node, w)? > threshold {
        return Ok(None);
    }
    let children: Vec<NodeId> = node.children.iter().map(|e| e.child).collect();
    for child in children {
        if pool.kind_unchecked(child).is_interior()
            && similarity_score(obs, pool.node(child)?, w)? > threshold
        {
            return Ok(None);
        }
    }
    let new = pool.add_interior(obs)?;
    pool.link(selected, new, 0.0)?;
    Ok(Some(new))
}

/// Attention adaptation: `W +- beta * (U - V)`, plus when the reward moving
/// average is rising, minus otherwise. Components are floored at 1e-6 to
/// keep every weight strictly positive.
pub fn update_attention(
    w: &AttentionWeights,
    obs: &[f64],
    value: &[f64],
    beta: f64,
    reward_trend_up: bool,
) -> Result<AttentionWeights> {
    if obs.len() != w.dim() || value.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            actual: if obs.len() != w.dim() {
                obs.len()
            } else {
                value.len()
            },
        });
    }
    let sign = if reward_trend_up { 1.0 } else { -1.0 };
    let components = w
        .components()
        .iter()
        .zip(obs.iter().zip(value.iter()))
        .map(|(&wi, (&u, &v))| (wi + sign * beta * (u - v)).max(1e-6))
        .collect();
    AttentionWeights::new(components)
}

/// Every knob of one learner, in the shape of the flat configuration file.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerConfig {
    /// How many recent decision paths each reward is propagated over.
    pub trace_length: usize,
    /// Geometric discount applied per step of path age.
    pub gamma: f64,
    /// Similarity score above which an existing node absorbs the state.
    pub accommodation_threshold: f64,
    /// Random-alternative probability of action selection; 0 disables it.
    pub epsilon: f64,
    /// Blend factor for executed continuous actions; 1 disables smoothing.
    pub alpha: f64,
    /// Attention learning rate.
    pub beta: f64,
    /// Depth bound of the descendant search.
    pub max_depth: usize,
    /// Memory cleansing cadence in environment steps; 0 disables it.
    pub prune_every: u64,
    /// Interior-children cap enforced by cleansing.
    pub max_children: usize,
    /// Action edges kept per node by cleansing; 0 keeps all of them.
    pub keep_top_actions: usize,
    /// Learner RNG seed.
    pub seed: u64,
    /// Whether attention weights adapt with the reward trend.
    pub adapt_attention: bool,
    /// Window of the reward moving average that drives the adaptation sign.
    pub reward_ma_window: usize,
    /// Grid resolution used to discretize continuous action ranges.
    pub action_grid: usize,
    /// Initial attention weights; None means all ones. Non-uniform weights
    /// set the relative importance of each input dimension, which also
    /// sets the per-dimension granularity of accommodation.
    pub attention: Option<Vec<f64>>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            trace_length: 5,
            gamma: 0.9,
            accommodation_threshold: 0.9,
            epsilon: 0.0,
            alpha: 1.0,
            beta: 0.04,
            max_depth: 8,
            prune_every: 500,
            max_children: 32,
            keep_top_actions: 0,
            seed: 0,
            adapt_attention: false,
            reward_ma_window: 100,
            action_grid: 9,
            attention: None,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trace_length == 0 {
            return Err(Error::Config("trace_length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} not in [0,1]", self.gamma)));
        }
        if !(self.accommodation_threshold > 0.0 && self.accommodation_threshold < 1.0) {
            return Err(Error::Config(format!(
                "accommodation_threshold {} not in (0,1)",
                self.accommodation_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} not in [0,1]", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} not in [0,1]", self.alpha)));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(Error::Config(format!("beta {} must be non-negative", self.beta)));
        }
        if self.action_grid < 2 {
            return Err(Error::Config("action_grid must be at least 2".into()));
        }
        if self.adapt_attention && self.reward_ma_window == 0 {
            return Err(Error::Config("reward_ma_window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything the caller needs to act on and to log one decision.
#[derive(Clone, Debug)]
pub struct Decision {
    pub path: DecisionPath,
    /// Distance from the observation to each node along the path.
    pub distances: Vec<f64>,
    /// Value handed to the environment: the action index for discrete
    /// environments, the (possibly smoothed) control value for continuous
    /// ones.
    pub executable: f64,
    /// True when epsilon-greedy replaced the greedy action.
    pub exploratory: bool,
    /// Id of the node accommodation created this step, if any.
    pub accommodated: Option<NodeId>,
}

impl Decision {
    pub fn action_index(&self) -> usize {
        self.path.action_index
    }
}

/// A sequential learner bound to one environment's dimensions: owns the
/// pool, the attention weights, the trace buffer, and an isolated RNG.
#[derive(Clone, Debug)]
pub struct Learner {
    cfg: LearnerConfig,
    pool: OptionPool,
    attention: AttentionWeights,
    buffer: TraceBuffer,
    action_mode: ActionMode,
    rng: ChaCha8Rng,
    scratch: Traversal,
    steps_seen: u64,
    last_executed: f64,
    reward_window: VecDeque<f64>,
    reward_window_sum: f64,
    prev_reward_ma: Option<f64>,
}

impl Learner {
    pub fn new(cfg: LearnerConfig, env: &EnvironmentSpec) -> Result<Self> {
        cfg.validate()?;
        let action_count = match env.action_mode {
            ActionMode::Discrete { count } => count,
            ActionMode::Continuous { grid, .. } => grid,
        };
        let pool = OptionPool::new(env.obs_dim, action_count)?;
        let attention = match &cfg.attention {
            Some(components) => {
                if components.len() != env.obs_dim {
                    return Err(Error::DimensionMismatch {
                        expected: env.obs_dim,
                        actual: components.len(),
                    });
                }
                AttentionWeights::new(components.clone())?
            }
            None => AttentionWeights::ones(env.obs_dim),
        };
        let buffer = TraceBuffer::new(cfg.trace_length)?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Learner {
            cfg,
            pool,
            attention,
            buffer,
            action_mode: env.action_mode,
            rng,
            scratch: Traversal::default(),
            steps_seen: 0,
            last_executed: 0.0,
            reward_window: VecDeque::new(),
            reward_window_sum: 0.0,
            prev_reward_ma: None,
        })
    }

    /// Rebuilds a learner around an existing pool, e.g. one loaded from
    /// disk for frozen evaluation.
    pub fn with_pool(cfg: LearnerConfig, env: &EnvironmentSpec, pool: OptionPool) -> Result<Self> {
        let mut learner = Learner::new(cfg, env)?;
        if pool.obs_dim() != env.obs_dim {
            return Err(Error::DimensionMismatch {
                expected: env.obs_dim,
                actual: pool.obs_dim(),
            });
        }
        learner.pool = pool;
        Ok(learner)
    }

    pub fn pool(&self) -> &OptionPool {
        &self.pool
    }

    pub fn into_pool(self) -> OptionPool {
        self.pool
    }

    pub fn attention(&self) -> &AttentionWeights {
        &self.attention
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    pub fn buffer(&self) -> &TraceBuffer {
        &self.buffer
    }

    /// One full cycle: credit the reward of the previous action over the
    /// trace buffer, then (unless the episode just ended) match, possibly
    /// accommodate, select an action on the updated pool, and remember the
    /// new path. Returns None on episode end, where the buffer is cleared.
    pub fn step(
        &mut self,
        obs: &[f64],
        reward_from_last: Option<f64>,
        done: bool,
    ) -> Result<Option<Decision>> {
        if let Some(r) = reward_from_last {
            self.buffer.set_newest_reward(r);
            apply_rewards(&self.buffer, &mut self.pool, self.cfg.gamma);
            if self.cfg.adapt_attention {
                self.note_reward(r);
            }
        }
        if done {
            self.buffer.clear();
            self.last_executed = 0.0;
            return Ok(None);
        }

        let accommodated;
        let entry = match self.pool.nearest_interior(obs, &self.attention) {
            Ok((id, _)) => {
                accommodated = accommodate(
                    &mut self.pool,
                    id,
                    obs,
                    &self.attention,
                    self.cfg.accommodation_threshold,
                )?;
                accommodated.unwrap_or(id)
            }
            Err(Error::NoSchema) => {
                // Bootstrap: the first observation becomes the first node.
                let id = self.pool.add_interior(obs)?;
                accommodated = Some(id);
                id
            }
            Err(e) => return Err(e),
        };

        let mut path = select_action_with(
            &self.pool,
            entry,
            obs,
            &self.attention,
            self.cfg.max_depth,
            &mut self.scratch,
        )?;

        let mut exploratory = false;
        if self.cfg.epsilon > 0.0 {
            let selected = path.selected();
            let available: Vec<usize> = self
                .pool
                .node(selected)?
                .children
                .iter()
                .filter_map(|e| match self.pool.kind_unchecked(e.child) {
                    NodeKind::ActionLeaf { action } => Some(action),
                    NodeKind::Interior => None,
                })
                .collect();
            let replacement =
                epsilon_greedy(path.action_index, &available, self.cfg.epsilon, &mut self.rng);
            if replacement != path.action_index {
                let leaf = self.pool.leaf_of_action(replacement)?;
                path.steps.last_mut().expect("path is never empty").child = leaf;
                path.action_index = replacement;
                exploratory = true;
            }
        }

        let executable = match self.action_mode {
            ActionMode::Discrete { .. } => path.action_index as f64,
            ActionMode::Continuous { lo, hi, .. } => {
                let grid =
                    crate::env::discretize_action(path.action_index, lo, hi, self.pool.action_count())?;
                let executed = smooth_action(grid, self.last_executed, self.cfg.alpha);
                self.last_executed = executed;
                executed
            }
        };

        if self.cfg.adapt_attention {
            let trend_up = self.reward_trend_up();
            let value = self.pool.node(entry)?.value.clone();
            self.attention =
                update_attention(&self.attention, obs, &value, self.cfg.beta, trend_up)?;
        }

        let mut distances = Vec::with_capacity(path.steps.len());
        for id in path.node_ids() {
            distances.push(distance(obs, self.pool.node(id)?, &self.attention)?);
        }

        self.steps_seen += 1;
        if self.cfg.prune_every > 0 && self.steps_seen % self.cfg.prune_every == 0 {
            self.pool.cleanse(
                self.cfg.max_children,
                self.cfg.keep_top_actions,
                &self.attention,
            )?;
        }

        // Recording the path marks one traversal of each of its edges; the
        // per-traversal mean credit is what action selection compares.
        for step in &path.steps {
            self.pool.add_visit(step.node, step.child);
        }
        self.buffer.push(path.clone());
        Ok(Some(Decision {
            path,
            distances,
            executable,
            exploratory,
            accommodated,
        }))
    }

    fn note_reward(&mut self, r: f64) {
        self.reward_window.push_back(r);
        self.reward_window_sum += r;
        while self.reward_window.len() > self.cfg.reward_ma_window {
            self.reward_window_sum -= self.reward_window.pop_front().unwrap_or(0.0);
        }
        // prev_reward_ma is refreshed lazily by reward_trend_up.
    }

    fn reward_trend_up(&mut self) -> bool {
        if self.reward_window.is_empty() {
            return true;
        }
        let ma = self.reward_window_sum / self.reward_window.len() as f64;
        let up = match self.prev_reward_ma {
            Some(prev) => ma >= prev,
            None => true,
        };
        self.prev_reward_ma = Some(ma);
        up
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{find_most_similar, InferenceConfig, PathStep};

    fn ones(dim: usize) -> AttentionWeights {
        AttentionWeights::ones(dim)
    }

    fn single_step_path(node: NodeId, leaf: NodeId, action: usize) -> DecisionPath {
        DecisionPath {
            steps: vec![PathStep { node, child: leaf }],
            action_index: action,
        }
    }

    #[test]
    fn accommodate_skips_identical_state() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let id = pool.add_interior(&[0.5, 0.5]).unwrap();
        let created = accommodate(&mut pool, id, &[0.5, 0.5], &ones(2), 0.99).unwrap();
        assert!(created.is_none());
        assert_eq!(pool.interior_count(), 1);
    }

    #[test]
    fn accommodate_creates_child_when_all_scores_below_threshold() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let id = pool.add_interior(&[0.0, 0.0]).unwrap();
        let obs = [1.0, 1.0]; // similarity 1/3 <= 0.99
        let created = accommodate(&mut pool, id, &obs, &ones(2), 0.99).unwrap().unwrap();
        let node = pool.node(created).unwrap();
        assert_eq!(node.value, obs.to_vec());
        // Wired to every leaf at weight zero and registered as a child.
        assert_eq!(node.children.len(), 2);
        assert!(node.children.iter().all(|e| e.weight == 0.0));
        let parent = pool.node(id).unwrap();
        let link = parent.children.iter().find(|e| e.child == created).unwrap();
        assert_eq!(link.weight, 0.0);
        // The new node is now the exact match for the observation.
        assert_eq!(find_most_similar(&pool, &obs, &ones(2)).unwrap(), created);
    }

    #[test]
    fn accommodate_respects_similar_child() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let parent = pool.add_interior(&[5.0, 5.0]).unwrap();
        let child = pool.add_interior(&[0.0, 0.0]).unwrap();
        pool.link(parent, child, 0.0).unwrap();
        // Observation is far from the parent but within threshold of the child.
        let created = accommodate(&mut pool, parent, &[0.005, 0.0], &ones(2), 0.99).unwrap();
        assert!(created.is_none());
    }

    #[test]
    fn apply_rewards_degenerate_trace() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let id = pool.add_interior(&[0.0, 0.0]).unwrap();
        let mut buffer = TraceBuffer::new(1).unwrap();
        buffer.push(single_step_path(id, NodeId(0), 0));
        buffer.set_newest_reward(2.0);
        apply_rewards(&buffer, &mut pool, 0.9);
        let w = pool.node(id).unwrap().children[0].weight;
        assert_eq!(w, 2.0);
    }

    #[test]
    fn apply_rewards_discounts_by_age() {
        // L = 2, gamma = 0.5, reward 1 twice: the older path accumulates
        // 1 + 0.5, the newer one 1.
        let mut pool = OptionPool::new(2, 2).unwrap();
        let a = pool.add_interior(&[0.0, 0.0]).unwrap();
        let b = pool.add_interior(&[1.0, 1.0]).unwrap();
        let mut buffer = TraceBuffer::new(2).unwrap();
        buffer.push(single_step_path(a, NodeId(0), 0));
        buffer.set_newest_reward(1.0);
        apply_rewards(&buffer, &mut pool, 0.5);
        buffer.push(single_step_path(b, NodeId(1), 1));
        buffer.set_newest_reward(1.0);
        apply_rewards(&buffer, &mut pool, 0.5);
        assert_eq!(pool.node(a).unwrap().children[0].weight, 1.5);
        assert_eq!(pool.node(b).unwrap().children[1].weight, 1.0);
    }

    #[test]
    fn apply_rewards_gamma_zero_touches_newest_only() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let a = pool.add_interior(&[0.0, 0.0]).unwrap();
        let b = pool.add_interior(&[1.0, 1.0]).unwrap();
        let mut buffer = TraceBuffer::new(5).unwrap();
        buffer.push(single_step_path(a, NodeId(0), 0));
        buffer.push(single_step_path(b, NodeId(1), 1));
        buffer.set_newest_reward(3.0);
        apply_rewards(&buffer, &mut pool, 0.0);
        assert_eq!(pool.node(b).unwrap().children[1].weight, 3.0);
        assert_eq!(pool.node(a).unwrap().children[0].weight, 0.0);
    }

    #[test]
    fn trace_buffer_caps_length() {
        let mut buffer = TraceBuffer::new(2).unwrap();
        for i in 0..5 {
            buffer.push(single_step_path(NodeId(2), NodeId(0), i % 2));
        }
        assert_eq!(buffer.len(), 2);
    }

    #[test]
    fn update_attention_zero_residual_is_identity() {
        let w = ones(3);
        let out = update_attention(&w, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 0.04, true).unwrap();
        assert_eq!(out.components(), w.components());
    }

    #[test]
    fn update_attention_signs_follow_trend() {
        let w = ones(3);
        let up = update_attention(&w, &[0.5, 0.0, -0.5], &[0.0, 0.0, 0.0], 0.04, true).unwrap();
        let expect = [1.02, 1.0, 0.98];
        for (a, b) in up.components().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let down = update_attention(&w, &[0.5, 0.0, -0.5], &[0.0, 0.0, 0.0], 0.04, false).unwrap();
        let expect = [0.98, 1.0, 1.02];
        for (a, b) in down.components().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn update_attention_floors_at_positive_value() {
        let w = ones(1);
        let out = update_attention(&w, &[100.0], &[0.0], 1.0, false).unwrap();
        assert_eq!(out.components(), &[1e-6]);
    }

    fn test_env_spec(obs_dim: usize, actions: usize) -> EnvironmentSpec {
        EnvironmentSpec {
            obs_dim,
            action_mode: ActionMode::Discrete { count: actions },
            max_steps: 100,
        }
    }

    #[test]
    fn first_step_bootstraps_and_returns_action_zero() {
        let mut learner = Learner::new(LearnerConfig::default(), &test_env_spec(2, 2)).unwrap();
        let dec = learner.step(&[0.3, -0.3], None, false).unwrap().unwrap();
        assert_eq!(dec.action_index(), 0);
        assert_eq!(learner.pool().interior_count(), 1);
        assert_eq!(dec.accommodated, Some(NodeId(2)));
        assert_eq!(dec.distances, vec![0.0]);
    }

    #[test]
    fn episode_end_clears_the_buffer() {
        let mut learner = Learner::new(LearnerConfig::default(), &test_env_spec(2, 2)).unwrap();
        learner.step(&[0.0, 0.0], None, false).unwrap();
        learner.step(&[1.0, 1.0], Some(1.0), false).unwrap();
        assert_eq!(learner.buffer().len(), 2);
        let out = learner.step(&[1.0, 1.0], Some(1.0), true).unwrap();
        assert!(out.is_none());
        assert!(learner.buffer().is_empty());
        // The next step credits nothing: weights stay where they were.
        let before: Vec<f64> = learner
            .pool()
            .nodes()
            .flat_map(|n| n.children.iter().map(|e| e.weight))
            .collect();
        learner.step(&[2.0, 2.0], None, false).unwrap();
        let after: Vec<f64> = learner
            .pool()
            .nodes()
            .flat_map(|n| n.children.iter().map(|e| e.weight))
            .collect();
        // New node edges are appended at weight zero; existing ones moved not.
        assert_eq!(&after[..before.len()], &before[..]);
    }

    #[test]
    fn reward_credits_trace_geometrically() {
        // Five distinct situations, then one reward: the buffered paths
        // must receive 1, 0.9, 0.81, 0.729, 0.6561 newest to oldest.
        let cfg = LearnerConfig {
            accommodation_threshold: 0.5,
            ..LearnerConfig::default()
        };
        let mut learner = Learner::new(cfg, &test_env_spec(1, 2)).unwrap();
        let mut reward = None;
        for i in 0..5 {
            learner.step(&[10.0 * i as f64], reward, false).unwrap();
            reward = Some(0.0); // keep weights untouched while filling
        }
        learner.step(&[100.0], Some(1.0), false).unwrap();
        let mut got: Vec<f64> = learner
            .pool()
            .nodes()
            .filter(|n| n.kind.is_interior())
            .map(|n| n.children[0].weight)
            .filter(|&w| w != 0.0)
            .collect();
        got.sort_by(|a, b| b.total_cmp(a));
        let expect = [1.0, 0.9, 0.81, 0.729, 0.6561];
        assert_eq!(got.len(), expect.len());
        for (a, b) in got.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn zero_reward_episode_leaves_weights_unchanged() {
        let cfg = LearnerConfig {
            accommodation_threshold: 0.5,
            ..LearnerConfig::default()
        };
        let mut learner = Learner::new(cfg, &test_env_spec(1, 2)).unwrap();
        let mut reward = None;
        for i in 0..20 {
            learner.step(&[i as f64], reward, false).unwrap();
            reward = Some(0.0);
        }
        learner.step(&[0.0], Some(0.0), true).unwrap();
        assert!(learner
            .pool()
            .nodes()
            .all(|n| n.children.iter().all(|e| e.weight == 0.0)));
    }

    #[test]
    fn fixed_seed_reproduces_decisions_bitwise() {
        let cfg = LearnerConfig {
            epsilon: 0.3,
            seed: 42,
            accommodation_threshold: 0.8,
            ..LearnerConfig::default()
        };
        let run = |cfg: LearnerConfig| {
            let mut learner = Learner::new(cfg, &test_env_spec(2, 3)).unwrap();
            let mut actions = Vec::new();
            let mut reward = None;
            for i in 0..200 {
                let obs = [((i * 7) % 13) as f64 * 0.21, ((i * 3) % 5) as f64 * -0.4];
                let dec = learner.step(&obs, reward, false).unwrap().unwrap();
                actions.push(dec.action_index());
                reward = Some(if i % 2 == 0 { 1.0 } else { -0.5 });
            }
            (actions, learner.pool().to_json())
        };
        let (a1, p1) = run(cfg.clone());
        let (a2, p2) = run(cfg);
        assert_eq!(a1, a2);
        assert_eq!(p1, p2);
    }
}
