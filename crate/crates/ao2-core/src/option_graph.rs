//! Option-node data model: the global pool, the attention-weighted
//! similarity measure, reachability, and structural maintenance.
//!
//! The pool is a directed graph over two node kinds. Interior nodes carry a
//! value vector (the situation they stand for) and weighted edges to child
//! nodes; action leaves carry a primitive action index and never have
//! children. The pool always contains exactly one leaf per primitive action,
//! created at initialization and never deleted. Cycles are permitted, so
//! every traversal carries a visited set.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node identifier. Action leaves occupy ids `0..action_count`, in
/// action order; interior nodes follow in creation order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node role within the pool.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeKind {
    Interior,
    /// Terminal node holding one primitive action.
    ActionLeaf { action: usize },
}

impl NodeKind {
    #[inline]
    pub fn is_interior(self) -> bool {
        matches!(self, NodeKind::Interior)
    }
}

/// Weighted reference to a child node. The weight accumulates discounted
/// rewards credited by assimilation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub child: NodeId,
    pub weight: f64,
}

/// One building block: a value vector plus weighted child references.
///
/// `visits` counts, per edge, how many recorded decision paths traversed
/// it. Visit counts are runtime statistics: action selection reads the mean
/// credit per traversal (see `mean_weight`), while the stored weights stay
/// the raw accumulated sums and are what the wire format carries.
#[derive(Clone, Debug)]
pub struct OptionNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub value: Vec<f64>,
    pub children: Vec<Edge>,
    visits: Vec<u64>,
}

impl OptionNode {
    /// Edges whose child is an action leaf, looked up against `pool`.
    pub fn action_edges<'a>(&'a self, pool: &'a OptionPool) -> impl Iterator<Item = &'a Edge> {
        self.children
            .iter()
            .filter(move |e| !pool.kind_unchecked(e.child).is_interior())
    }

    /// How many recorded paths traversed the edge at `position`.
    pub fn edge_visits(&self, position: usize) -> u64 {
        self.visits.get(position).copied().unwrap_or(0)
    }

    /// Accumulated credit per traversal of the edge at `position`. Edges
    /// never traversed compare by their raw weight, so hand-built pools
    /// behave exactly like the raw argmax.
    pub fn mean_weight(&self, position: usize) -> f64 {
        self.children[position].weight / self.edge_visits(position).max(1) as f64
    }
}

/// Per-dimension positive weights of the similarity measure.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionWeights {
    w: Vec<f64>,
}

impl AttentionWeights {
    /// All-ones weights: every input dimension matters equally.
    pub fn ones(dim: usize) -> Self {
        AttentionWeights { w: vec![1.0; dim] }
    }

    /// Builds weights from explicit components; every component must be
    /// strictly positive and finite.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Contract(
                "attention weights must be strictly positive and finite".into(),
            ));
        }
        Ok(AttentionWeights { w })
    }

    #[inline]
    pub fn components(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

/// Attention-weighted L1 distance between an observation and a node value:
/// the sum over dimensions of `w_i * |u_i - v_i|`. Zero exactly when the
/// observation equals the node value componentwise.
pub fn distance(obs: &[f64], node: &OptionNode, w: &AttentionWeights) -> Result<f64> {
    if !node.kind.is_interior() {
        return Err(Error::NotInterior(node.id));
    }
    if obs.len() != node.value.len() || w.dim() != node.value.len() {
        return Err(Error::DimensionMismatch {
            expected: node.value.len(),
            actual: if obs.len() != node.value.len() {
                obs.len()
            } else {
                w.dim()
            },
        });
    }
    Ok(weighted_l1(obs, &node.value, w.components()))
}

/// Distance mapped onto (0, 1]: `1 / (1 + d)`. Strictly decreasing in the
/// distance and equal to 1 exactly at distance zero, so accommodation
/// thresholds like 0.9 or 0.99 compare against a normalized score.
pub fn similarity_score(obs: &[f64], node: &OptionNode, w: &AttentionWeights) -> Result<f64> {
    Ok(score_from_distance(distance(obs, node, w)?))
}

#[inline]
pub fn score_from_distance(d: f64) -> f64 {
    1.0 / (1.0 + d)
}

#[inline]
fn weighted_l1(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    let mut d = 0.0;
    for i in 0..a.len() {
        d += w[i] * (a[i] - b[i]).abs();
    }
    d
}

/// The global set of option nodes and action leaves; the system's entire
/// memory. Node ids are dense and nodes are never deleted (memory cleansing
/// removes edges, not nodes), so interior values are mirrored in a flat
/// append-only buffer that the nearest-node scan walks contiguously.
#[derive(Clone, Debug)]
pub struct OptionPool {
    nodes: Vec<OptionNode>,
    obs_dim: usize,
    action_count: usize,
    interior_ids: Vec<NodeId>,
    interior_values: Vec<f64>,
}

impl OptionPool {
    /// Creates a pool holding only the `action_count` action leaves.
    /// The first observed state bootstraps the first interior node.
    pub fn new(obs_dim: usize, action_count: usize) -> Result<Self> {
        if obs_dim == 0 || action_count == 0 {
            return Err(Error::Config(
                "observation dimension and action count must be positive".into(),
            ));
        }
        let nodes = (0..action_count)
            .map(|a| OptionNode {
                id: NodeId(a as u32),
                kind: NodeKind::ActionLeaf { action: a },
                value: vec![0.0; obs_dim],
                children: Vec::new(),
                visits: Vec::new(),
            })
            .collect();
        Ok(OptionPool {
            nodes,
            obs_dim,
            action_count,
            interior_ids: Vec::new(),
            interior_values: Vec::new(),
        })
    }

    #[inline]
    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    #[inline]
    pub fn action_count(&self) -> usize {
        self.action_count
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn interior_count(&self) -> usize {
        self.interior_ids.len()
    }

    /// Id of the leaf carrying `action`.
    pub fn leaf_of_action(&self, action: usize) -> Result<NodeId> {
        if action >= self.action_count {
            return Err(Error::Contract(format!(
                "action index {action} out of range (action count {})",
                self.action_count
            )));
        }
        Ok(NodeId(action as u32))
    }

    pub fn node(&self, id: NodeId) -> Result<&OptionNode> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Result<&mut OptionNode> {
        self.nodes.get_mut(id.index()).ok_or(Error::UnknownNode(id))
    }

    #[inline]
    pub(crate) fn kind_unchecked(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &OptionNode> {
        self.nodes.iter()
    }

    pub fn interior_ids(&self) -> &[NodeId] {
        &self.interior_ids
    }

    /// Creates an interior node for `value` with a zero-weight edge to every
    /// action leaf, so the node can always emit an action.
    pub fn add_interior(&mut self, value: &[f64]) -> Result<NodeId> {
        if value.len() != self.obs_dim {
            return Err(Error::DimensionMismatch {
                expected: self.obs_dim,
                actual: value.len(),
            });
        }
        let id = NodeId(self.nodes.len() as u32);
        let children = (0..self.action_count)
            .map(|a| Edge {
                child: NodeId(a as u32),
                weight: 0.0,
            })
            .collect();
        self.nodes.push(OptionNode {
            id,
            kind: NodeKind::Interior,
            value: value.to_vec(),
            children,
            visits: vec![0; self.action_count],
        });
        self.interior_ids.push(id);
        self.interior_values.extend_from_slice(value);
        Ok(id)
    }

    /// Adds an edge `parent -> child` with the given starting weight.
    /// A node never holds two edges to the same child.
    pub fn link(&mut self, parent: NodeId, child: NodeId, weight: f64) -> Result<()> {
        if !self.contains(child) {
            return Err(Error::UnknownNode(child));
        }
        let node = self.node_mut(parent)?;
        if !node.kind.is_interior() {
            return Err(Error::NotInterior(parent));
        }
        if node.children.iter().any(|e| e.child == child) {
            return Err(Error::Contract(format!(
                "node {parent} already has an edge to {child}"
            )));
        }
        node.children.push(Edge { child, weight });
        node.visits.push(0);
        Ok(())
    }

    /// Marks one traversal of the edge `parent -> child` by a recorded
    /// decision path. Silently skips edges that no longer exist.
    pub fn add_visit(&mut self, parent: NodeId, child: NodeId) -> bool {
        let Some(node) = self.nodes.get_mut(parent.index()) else {
            return false;
        };
        match node.children.iter().position(|e| e.child == child) {
            Some(pos) => {
                node.visits[pos] += 1;
                true
            }
            None => false,
        }
    }

    /// Adds `delta` to the weight of the edge `parent -> child`. Returns
    /// false (and changes nothing) when the edge no longer exists, so credit
    /// assignment silently skips edges removed by memory cleansing.
    pub fn add_weight(&mut self, parent: NodeId, child: NodeId, delta: f64) -> bool {
        let Some(node) = self.nodes.get_mut(parent.index()) else {
            return false;
        };
        match node.children.iter_mut().find(|e| e.child == child) {
            Some(edge) => {
                edge.weight += delta;
                true
            }
            None => false,
        }
    }

    /// Interior node nearest to `obs` under the current attention weights,
    /// together with its distance. Ties break toward the lowest id.
    pub fn nearest_interior(&self, obs: &[f64], w: &AttentionWeights) -> Result<(NodeId, f64)> {
        if obs.len() != self.obs_dim || w.dim() != self.obs_dim {
            return Err(Error::DimensionMismatch {
                expected: self.obs_dim,
                actual: if obs.len() != self.obs_dim {
                    obs.len()
                } else {
                    w.dim()
                },
            });
        }
        if self.interior_ids.is_empty() {
            return Err(Error::NoSchema);
        }
        let (row, d) = scan_argmin(&self.interior_values, self.obs_dim, obs, w.components());
        Ok((self.interior_ids[row], d))
    }

    /// All interior nodes reachable from `root` within `max_depth` edge
    /// hops, including the root itself. Terminates on cyclic graphs.
    pub fn descendants(&self, root: NodeId, max_depth: usize) -> Result<Vec<NodeId>> {
        let root_node = self.node(root)?;
        if !root_node.kind.is_interior() {
            return Err(Error::NotInterior(root));
        }
        // Breadth-first so each node is first seen at its minimal depth;
        // a depth-first scan could mark a node deep and miss its children.
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back((root, 0usize));
        seen.insert(root);
        while let Some((id, depth)) = queue.pop_front() {
            out.push(id);
            if depth == max_depth {
                continue;
            }
            for edge in &self.nodes[id.index()].children {
                if self.kind_unchecked(edge.child).is_interior() && seen.insert(edge.child) {
                    queue.push_back((edge.child, depth + 1));
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Memory cleansing, structural half: while the node has more than
    /// `max_children` interior-child edges, removes the edge whose child
    /// value is most distant from the node's own value. Action-leaf edges
    /// are never touched. Returns the number of edges removed.
    pub fn prune_children(
        &mut self,
        id: NodeId,
        max_children: usize,
        w: &AttentionWeights,
    ) -> Result<usize> {
        let node = self.node(id)?;
        if !node.kind.is_interior() {
            return Err(Error::NotInterior(id));
        }
        let own_value = node.value.clone();
        let mut interior: Vec<(usize, f64, NodeId)> = node
            .children
            .iter()
            .enumerate()
            .filter(|(_, e)| self.kind_unchecked(e.child).is_interior())
            .map(|(pos, e)| {
                let d = weighted_l1(
                    &own_value,
                    &self.nodes[e.child.index()].value,
                    w.components(),
                );
                (pos, d, e.child)
            })
            .collect();
        if interior.len() <= max_children {
            return Ok(0);
        }
        // Most distant first; equal distances drop the newer child.
        interior.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.cmp(&a.2)));
        let doomed: HashSet<usize> = interior[..interior.len() - max_children]
            .iter()
            .map(|&(pos, _, _)| pos)
            .collect();
        Ok(self.remove_edges(id, &doomed)?)
    }

    /// Memory cleansing, action half: keeps only the `keep_top` action-leaf
    /// edges with the highest weights (ties keep the lower action index).
    /// The last remaining action edge is never removed.
    pub fn prune_actions(&mut self, id: NodeId, keep_top: usize) -> Result<usize> {
        if keep_top == 0 {
            return Err(Error::Contract("keep_top must be at least 1".into()));
        }
        let node = self.node(id)?;
        if !node.kind.is_interior() {
            return Err(Error::NotInterior(id));
        }
        let mut actions: Vec<(usize, f64, usize)> = node
            .children
            .iter()
            .enumerate()
            .filter_map(|(pos, e)| match self.kind_unchecked(e.child) {
                NodeKind::ActionLeaf { action } => Some((pos, e.weight, action)),
                NodeKind::Interior => None,
            })
            .collect();
        if actions.len() <= keep_top {
            return Ok(0);
        }
        // Highest weight first; ties prefer the lower action index.
        actions.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
        let doomed: HashSet<usize> = actions[keep_top..].iter().map(|&(pos, _, _)| pos).collect();
        Ok(self.remove_edges(id, &doomed)?)
    }

    /// Drops the edges at the given positions, keeping the visit counters
    /// aligned with the surviving edges.
    fn remove_edges(&mut self, id: NodeId, doomed: &HashSet<usize>) -> Result<usize> {
        let node = self.node_mut(id)?;
        let before = node.children.len();
        let mut kept_children = Vec::with_capacity(before - doomed.len());
        let mut kept_visits = Vec::with_capacity(before - doomed.len());
        for (pos, (edge, visits)) in node.children.iter().zip(node.visits.iter()).enumerate() {
            if !doomed.contains(&pos) {
                kept_children.push(*edge);
                kept_visits.push(*visits);
            }
        }
        node.children = kept_children;
        node.visits = kept_visits;
        Ok(before - node.children.len())
    }

    /// Runs both cleansing passes over every interior node in id order.
    /// `keep_top_actions` of 0 disables action pruning.
    pub fn cleanse(
        &mut self,
        max_children: usize,
        keep_top_actions: usize,
        w: &AttentionWeights,
    ) -> Result<usize> {
        let ids: Vec<NodeId> = self.interior_ids.clone();
        let mut removed = 0;
        for id in ids {
            removed += self.prune_children(id, max_children, w)?;
            if keep_top_actions >= 1 {
                removed += self.prune_actions(id, keep_top_actions)?;
            }
        }
        Ok(removed)
    }

    /// Checks the structural invariants: every edge resolves, leaves have no
    /// children, no duplicate child ids, one leaf per action at ids 0..K.
    pub fn validate(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.index() != i {
                return Err(Error::Contract(format!(
                    "node at position {i} carries id {}",
                    node.id
                )));
            }
            match node.kind {
                NodeKind::ActionLeaf { action } => {
                    if i >= self.action_count || action != i {
                        return Err(Error::Contract(format!(
                            "action leaf {action} must sit at id {action}"
                        )));
                    }
                    if !node.children.is_empty() {
                        return Err(Error::Contract(format!(
                            "action leaf {} has children",
                            node.id
                        )));
                    }
                }
                NodeKind::Interior => {
                    if i < self.action_count {
                        return Err(Error::Contract(format!(
                            "id {i} is reserved for an action leaf"
                        )));
                    }
                    if node.value.len() != self.obs_dim {
                        return Err(Error::DimensionMismatch {
                            expected: self.obs_dim,
                            actual: node.value.len(),
                        });
                    }
                }
            }
            if node.visits.len() != node.children.len() {
                return Err(Error::Contract(format!(
                    "node {} visit counters out of step with its edges",
                    node.id
                )));
            }
            let mut seen = HashSet::new();
            for edge in &node.children {
                if !self.contains(edge.child) {
                    return Err(Error::UnknownNode(edge.child));
                }
                if !edge.weight.is_finite() {
                    return Err(Error::Contract(format!(
                        "edge {} -> {} has non-finite weight",
                        node.id, edge.child
                    )));
                }
                if !seen.insert(edge.child) {
                    return Err(Error::Contract(format!(
                        "node {} has duplicate edges to {}",
                        node.id, edge.child
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Linear argmin over the flat value buffer. Strict `<` keeps the first
/// (lowest-id) row on distance ties. Small fixed dimensions get their own
/// monomorphized loop so the compiler can unroll and vectorize them.
fn scan_argmin(values: &[f64], dim: usize, obs: &[f64], w: &[f64]) -> (usize, f64) {
    debug_assert_eq!(obs.len(), dim);
    debug_assert!(!values.is_empty());
    match dim {
        3 => scan_fixed::<3>(values, obs, w),
        4 => scan_fixed::<4>(values, obs, w),
        6 => scan_fixed::<6>(values, obs, w),
        _ => {
            let mut best = f64::INFINITY;
            let mut best_row = 0;
            for (row, v) in values.chunks_exact(dim).enumerate() {
                let mut d = 0.0;
                for j in 0..dim {
                    d += w[j] * (obs[j] - v[j]).abs();
                }
                if d < best {
                    best = d;
                    best_row = row;
                }
            }
            (best_row, best)
        }
    }
}

fn scan_fixed<const D: usize>(values: &[f64], obs: &[f64], w: &[f64]) -> (usize, f64) {
    let obs: &[f64; D] = obs.try_into().expect("dimension checked by caller");
    let w: &[f64; D] = w.try_into().expect("dimension checked by caller");
    let mut best = f64::INFINITY;
    let mut best_row = 0;
    for (row, v) in values.chunks_exact(D).enumerate() {
        let mut d = 0.0;
        for j in 0..D {
            d += w[j] * (obs[j] - v[j]).abs();
        }
        if d < best {
            best = d;
            best_row = row;
        }
    }
    (best_row, best)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Wire form of the pool: one JSON document with every float encoded as a
/// decimal string of 17 significant digits, which round-trips f64 exactly.
#[derive(Serialize, Deserialize)]
struct PoolDoc {
    obs_dim: usize,
    action_count: usize,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: u32,
    kind: String,
    value: Vec<String>,
    children: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    child: u32,
    weight: String,
}

/// 17 significant digits, scientific notation; lossless for every f64.
pub(crate) fn encode_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn decode_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("bad float {s:?}: {e}"))
}

impl OptionPool {
    /// Serializes the pool to its JSON wire form. Nodes are emitted in id
    /// order, so equal pools produce identical bytes.
    pub fn to_json(&self) -> String {
        let doc = PoolDoc {
            obs_dim: self.obs_dim,
            action_count: self.action_count,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.0,
                    kind: match n.kind {
                        NodeKind::Interior => "interior".into(),
                        NodeKind::ActionLeaf { .. } => "action_leaf".into(),
                    },
                    value: n.value.iter().copied().map(encode_f64).collect(),
                    children: n
                        .children
                        .iter()
                        .map(|e| EdgeDoc {
                            child: e.child.0,
                            weight: encode_f64(e.weight),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("pool serialization cannot fail")
    }

    /// Parses a pool from its JSON wire form and validates every invariant.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PoolDoc = serde_json::from_str(text)
            .map_err(|e| Error::Parse {
                path: "<pool json>".into(),
                message: e.to_string(),
            })?;
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        let mut interior_ids = Vec::new();
        let mut interior_values = Vec::new();
        for (i, nd) in doc.nodes.into_iter().enumerate() {
            let kind = match nd.kind.as_str() {
                "interior" => NodeKind::Interior,
                "action_leaf" => NodeKind::ActionLeaf { action: i },
                other => {
                    return Err(Error::Parse {
                        path: "<pool json>".into(),
                        message: format!("unknown node kind {other:?}"),
                    })
                }
            };
            let mut value = Vec::with_capacity(nd.value.len());
            for s in &nd.value {
                value.push(decode_f64(s).map_err(|m| Error::Parse {
                    path: "<pool json>".into(),
                    message: m,
                })?);
            }
            let mut children = Vec::with_capacity(nd.children.len());
            for e in &nd.children {
                children.push(Edge {
                    child: NodeId(e.child),
                    weight: decode_f64(&e.weight).map_err(|m| Error::Parse {
                        path: "<pool json>".into(),
                        message: m,
                    })?,
                });
            }
            if kind.is_interior() {
                interior_ids.push(NodeId(nd.id));
                interior_values.extend_from_slice(&value);
            }
            // Visit counters are runtime statistics outside the wire form.
            let visits = vec![0; children.len()];
            nodes.push(OptionNode {
                id: NodeId(nd.id),
                kind,
                value,
                children,
                visits,
            });
        }
        let pool = OptionPool {
            nodes,
            obs_dim: doc.obs_dim,
            action_count: doc.action_count,
            interior_ids,
            interior_values,
        };
        pool.validate()?;
        Ok(pool)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }
}
