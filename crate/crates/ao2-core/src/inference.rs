//! Action selection: nearest-node matching, the bi-level descent from the
//! matched node to an action leaf, and the action post-processing variants
//! (epsilon-greedy exploration, action smoothing).

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::option_graph::{distance, AttentionWeights, NodeId, NodeKind, OptionPool};

/// One hop of a decision: at `node`, the edge to `child` was taken. Edges
/// are identified by their child id (unique within a node), which stays
/// meaningful even after memory cleansing removes other edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub node: NodeId,
    pub child: NodeId,
}

/// The ordered node-and-edge sequence traversed by one inference, from the
/// matched entry node down to the edge selecting the action leaf. This is
/// the unit of both credit assignment and interpretability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionPath {
    pub steps: Vec<PathStep>,
    pub action_index: usize,
}

impl DecisionPath {
    /// Node ids along the path: entry first, then every hop target except
    /// the final action leaf.
    pub fn node_ids(&self) -> Vec<NodeId> {
        self.steps.iter().map(|s| s.node).collect()
    }

    pub fn entry(&self) -> NodeId {
        self.steps[0].node
    }

    /// The node whose action edge was taken.
    pub fn selected(&self) -> NodeId {
        self.steps[self.steps.len() - 1].node
    }
}

/// Knobs of the inference step.
#[derive(Clone, Copy, Debug)]
pub struct InferenceConfig {
    /// Probability of swapping the greedy action for a random alternative.
    pub epsilon: f64,
    /// Blend factor of executed continuous actions; 1.0 disables smoothing.
    pub alpha: f64,
    /// Depth bound of the descendant search.
    pub max_depth: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            epsilon: 0.0,
            alpha: 1.0,
            max_depth: 8,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} not in [0,1]", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} not in [0,1]", self.alpha)));
        }
        Ok(())
    }
}

/// The interior node nearest to the observation over the entire pool;
/// distance ties break toward the lowest id. Errors with `NoSchema` while
/// the pool has no interior node (the caller must accommodate first).
pub fn find_most_similar(pool: &OptionPool, obs: &[f64], w: &AttentionWeights) -> Result<NodeId> {
    pool.nearest_interior(obs, w).map(|(id, _)| id)
}

/// Full bi-level selection: match the nearest node, refine among its
/// descendants, then take the heaviest action edge.
pub fn select_action(
    pool: &OptionPool,
    obs: &[f64],
    w: &AttentionWeights,
    cfg: &InferenceConfig,
) -> Result<DecisionPath> {
    let entry = find_most_similar(pool, obs, w)?;
    select_action_from(pool, entry, obs, w, cfg)
}

/// Levels two and three of the selection, starting from a given entry node:
/// among the entry's descendants (depth-bounded), pick the node nearest to
/// the observation (ties: lowest id), then take its maximum-weight action
/// edge (ties: lowest action index). When the selected node has no action
/// edge left, descent continues through its maximum-weight interior child.
pub fn select_action_from(
    pool: &OptionPool,
    entry: NodeId,
    obs: &[f64],
    w: &AttentionWeights,
    cfg: &InferenceConfig,
) -> Result<DecisionPath> {
    let mut scratch = Traversal::default();
    select_action_with(pool, entry, obs, w, cfg.max_depth, &mut scratch)
}

/// Swaps the chosen action for a uniformly random alternative from the
/// available actions with probability `epsilon`. With a single available
/// action (or epsilon zero) the input is returned and the generator is
/// left untouched.
pub fn epsilon_greedy(
    chosen: usize,
    available: &[usize],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> usize {
    if epsilon <= 0.0 || available.len() <= 1 {
        return chosen;
    }
    if rng.gen::<f64>() < epsilon {
        let alternatives: Vec<usize> = available.iter().copied().filter(|&a| a != chosen).collect();
        if alternatives.is_empty() {
            return chosen;
        }
        alternatives[rng.gen_range(0..alternatives.len())]
    } else {
        chosen
    }
}

/// Blends the chosen continuous action with the previously executed one:
/// `alpha * chosen + (1 - alpha) * last`. The first step of an episode
/// uses zero as the last action.
pub fn smooth_action(chosen: f64, last: f64, alpha: f64) -> f64 {
    alpha * chosen + (1.0 - alpha) * last
}

// ---------------------------------------------------------------------------
// Traversal internals
// ---------------------------------------------------------------------------

/// Reusable BFS workspace. Visited marks are epoch stamps so clearing
/// between steps is O(1); the learner keeps one of these per replica.
#[derive(Default, Clone, Debug)]
pub(crate) struct Traversal {
    stamp: Vec<u32>,
    parent: Vec<u32>,
    dist: Vec<f64>,
    epoch: u32,
    queue: VecDeque<(u32, u32)>,
}

impl Traversal {
    fn begin(&mut self, n: usize) -> u32 {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.parent.resize(n, u32::MAX);
            self.dist.resize(n, 0.0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.queue.clear();
        self.epoch
    }
}

pub(crate) fn select_action_with(
    pool: &OptionPool,
    entry: NodeId,
    obs: &[f64],
    w: &AttentionWeights,
    max_depth: usize,
    scratch: &mut Traversal,
) -> Result<DecisionPath> {
    let entry_node = pool.node(entry)?;
    let entry_dist = distance(obs, entry_node, w)?;

    // Level 2: breadth-first over interior descendants, nearest node wins.
    let epoch = scratch.begin(pool.len());
    let ei = entry.index();
    scratch.stamp[ei] = epoch;
    scratch.parent[ei] = u32::MAX;
    scratch.dist[ei] = entry_dist;
    scratch.queue.push_back((entry.0, 0));
    let mut best = entry;
    let mut best_dist = entry_dist;
    while let Some((idx, depth)) = scratch.queue.pop_front() {
        if depth as usize == max_depth {
            continue;
        }
        let node = pool.node(NodeId(idx))?;
        for edge in &node.children {
            let ci = edge.child.index();
            if !pool.kind_unchecked(edge.child).is_interior() || scratch.stamp[ci] == epoch {
                continue;
            }
            scratch.stamp[ci] = epoch;
            scratch.parent[ci] = idx;
            let d = distance(obs, pool.node(edge.child)?, w)?;
            scratch.dist[ci] = d;
            if d < best_dist || (d == best_dist && edge.child < best) {
                best_dist = d;
                best = edge.child;
            }
            scratch.queue.push_back((edge.child.0, depth + 1));
        }
    }

    // Reconstruct entry -> ... -> selected from the BFS parents.
    let mut chain = vec![best];
    let mut cur = best.index();
    while scratch.parent[cur] != u32::MAX {
        let p = scratch.parent[cur];
        chain.push(NodeId(p));
        cur = p as usize;
    }
    chain.reverse();
    let mut steps: Vec<PathStep> = chain
        .windows(2)
        .map(|pair| PathStep {
            node: pair[0],
            child: pair[1],
        })
        .collect();

    // Level 3: the most rewarded action at the selected node, judged by
    // accumulated credit per traversal (never-traversed edges compare by
    // their raw weight). Falls back through the best interior child when
    // action edges were pruned away.
    let mut at = best;
    let mut fallback_seen: Option<HashSet<NodeId>> = None;
    loop {
        let node = pool.node(at)?;
        let mut best_action: Option<(f64, usize, NodeId)> = None;
        for (pos, edge) in node.children.iter().enumerate() {
            if let NodeKind::ActionLeaf { action } = pool.kind_unchecked(edge.child) {
                let mean = node.mean_weight(pos);
                let better = match best_action {
                    None => true,
                    Some((bm, ba, _)) => mean > bm || (mean == bm && action < ba),
                };
                if better {
                    best_action = Some((mean, action, edge.child));
                }
            }
        }
        if let Some((_, action, leaf)) = best_action {
            steps.push(PathStep {
                node: at,
                child: leaf,
            });
            return Ok(DecisionPath {
                steps,
                action_index: action,
            });
        }
        // No action edge here: descend through the best interior child.
        let seen = fallback_seen.get_or_insert_with(|| {
            let mut s = HashSet::new();
            s.insert(at);
            s
        });
        let mut next: Option<(f64, NodeId)> = None;
        for (pos, edge) in node.children.iter().enumerate() {
            if pool.kind_unchecked(edge.child).is_interior() && !seen.contains(&edge.child) {
                let mean = node.mean_weight(pos);
                let better = match next {
                    None => true,
                    Some((bm, bid)) => mean > bm || (mean == bm && edge.child < bid),
                };
                if better {
                    next = Some((mean, edge.child));
                }
            }
        }
        match next {
            Some((_, child)) => {
                steps.push(PathStep { node: at, child });
                seen.insert(child);
                at = child;
            }
            None => return Err(Error::NoAction(best)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn ones(dim: usize) -> AttentionWeights {
        AttentionWeights::ones(dim)
    }

    #[test]
    fn find_most_similar_prefers_nearest() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let a = pool.add_interior(&[0.0, 0.0]).unwrap();
        let b = pool.add_interior(&[1.0, 1.0]).unwrap();
        assert_eq!(
            find_most_similar(&pool, &[0.1, 0.0], &ones(2)).unwrap(),
            a
        );
        assert_eq!(
            find_most_similar(&pool, &[1.0, 1.0], &ones(2)).unwrap(),
            b
        );
    }

    #[test]
    fn find_most_similar_tie_takes_lowest_id() {
        let mut pool = OptionPool::new(1, 2).unwrap();
        let a = pool.add_interior(&[-1.0]).unwrap();
        let _b = pool.add_interior(&[1.0]).unwrap();
        // Observation 0.0 is equidistant from both.
        assert_eq!(find_most_similar(&pool, &[0.0], &ones(1)).unwrap(), a);
    }

    #[test]
    fn find_most_similar_requires_interior_node() {
        let pool = OptionPool::new(2, 2).unwrap();
        assert!(matches!(
            find_most_similar(&pool, &[0.0, 0.0], &ones(2)),
            Err(Error::NoSchema)
        ));
    }

    #[test]
    fn fresh_node_ties_resolve_to_action_zero() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let id = pool.add_interior(&[0.0, 0.0]).unwrap();
        let path = select_action(&pool, &[0.0, 0.0], &ones(2), &InferenceConfig::default()).unwrap();
        assert_eq!(path.action_index, 0);
        assert_eq!(path.steps.len(), 1);
        assert_eq!(path.entry(), id);
        assert_eq!(path.selected(), id);
    }

    #[test]
    fn heaviest_action_edge_wins() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        let id = pool.add_interior(&[0.0, 0.0]).unwrap();
        pool.add_weight(id, NodeId(0), 2.0);
        pool.add_weight(id, NodeId(1), -5.0);
        let path = select_action(&pool, &[0.0, 0.0], &ones(2), &InferenceConfig::default()).unwrap();
        assert_eq!(path.action_index, 0);
    }

    #[test]
    fn descent_reaches_closer_descendant() {
        // Entry 2 has child 3 whose value is nearer the observation; the
        // returned path must walk the hop 2 -> 3 and pick 3's best action.
        let mut pool = OptionPool::new(2, 2).unwrap();
        let f = pool.add_interior(&[0.0, 0.0]).unwrap();
        let s = pool.add_interior(&[1.0, 1.0]).unwrap();
        pool.link(f, s, 0.0).unwrap();
        pool.add_weight(s, NodeId(0), -1.0);
        pool.add_weight(s, NodeId(1), 4.0);
        let path = select_action_from(
            &pool,
            f,
            &[0.9, 0.9],
            &ones(2),
            &InferenceConfig::default(),
        )
        .unwrap();
        assert_eq!(path.action_index, 1);
        assert_eq!(path.node_ids(), vec![f, s]);
        assert_eq!(path.selected(), s);
    }

    #[test]
    fn constant_weight_shift_keeps_selection() {
        let mut pool = OptionPool::new(2, 3).unwrap();
        let id = pool.add_interior(&[0.0, 0.0]).unwrap();
        pool.add_weight(id, NodeId(0), -0.5);
        pool.add_weight(id, NodeId(1), 1.5);
        pool.add_weight(id, NodeId(2), 0.25);
        let cfg = InferenceConfig::default();
        let before = select_action(&pool, &[0.0, 0.0], &ones(2), &cfg)
            .unwrap()
            .action_index;
        for a in 0..3 {
            pool.add_weight(id, NodeId(a), 10.0);
        }
        let after = select_action(&pool, &[0.0, 0.0], &ones(2), &cfg)
            .unwrap()
            .action_index;
        assert_eq!(before, after);
    }

    #[test]
    fn selection_is_deterministic() {
        let mut pool = OptionPool::new(2, 2).unwrap();
        for i in 0..10 {
            pool.add_interior(&[i as f64 * 0.1, -(i as f64) * 0.2]).unwrap();
        }
        let cfg = InferenceConfig::default();
        let a = select_action(&pool, &[0.33, -0.1], &ones(2), &cfg).unwrap();
        let b = select_action(&pool, &[0.33, -0.1], &ones(2), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epsilon_zero_returns_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(epsilon_greedy(1, &[0, 1, 2], 0.0, &mut rng), 1);
        }
    }

    #[test]
    fn epsilon_one_forces_the_alternative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert_eq!(epsilon_greedy(0, &[0, 1], 1.0, &mut rng), 1);
        }
    }

    #[test]
    fn single_action_never_switches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(epsilon_greedy(0, &[0], 1.0, &mut rng), 0);
    }

    #[test]
    fn epsilon_switch_frequency_matches_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mut switched = 0;
        for _ in 0..n {
            if epsilon_greedy(0, &[0, 1], 0.1, &mut rng) != 0 {
                switched += 1;
            }
        }
        // Binomial(1e5, 0.1): mean 10_000, sigma ~94.9; allow 3 sigma.
        let mean = 10_000.0;
        let sigma = (n as f64 * 0.1 * 0.9).sqrt();
        assert!(
            (switched as f64 - mean).abs() < 3.0 * sigma,
            "switch count {switched} outside 3 sigma of {mean}"
        );
    }

    #[test]
    fn smoothing_blends_and_stays_bounded() {
        assert_eq!(smooth_action(2.0, -2.0, 1.0), 2.0);
        let v = smooth_action(2.0, -2.0, 0.9);
        assert!((v - 1.6).abs() < 1e-12);
        assert_eq!(smooth_action(1.0, 1.0, 0.9), 1.0);
        for &(c, l, a) in &[(0.5, -1.5, 0.3), (2.0, 0.0, 0.7), (-2.0, 2.0, 0.05)] {
            let v = smooth_action(c, l, a);
            assert!(v >= c.min(l) - 1e-12 && v <= c.max(l) + 1e-12);
        }
    }
}
