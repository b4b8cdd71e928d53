//! Human-facing exports: DOT graphs of option pools and step-by-step
//! decision explanations that justify each action in terms of the
//! attention-weighted distances and the action-weight argmax.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::option_graph::{AttentionWeights, NodeId, NodeKind, OptionPool};
use crate::trace::TraceRow;

/// Rounds to `sig` significant digits for display. Underlying files keep
/// full precision; this is for labels and aligned text only.
pub fn format_sig(v: f64, sig: i32) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (sig - 1 - exp).max(0);
    let scale = 10f64.powi(sig - 1 - exp);
    let rounded = (v * scale).round() / scale;
    format!("{:.*}", decimals as usize, rounded)
}

/// Read-only display model of a pool: rounded values plus usage statistics
/// recovered from a trace log. A pure function of (pool, trace).
#[derive(Clone, Debug, Serialize)]
pub struct PoolView {
    pub nodes: Vec<NodeView>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeView {
    pub id: u32,
    pub kind: String,
    pub value: Vec<String>,
    pub children: Vec<EdgeView>,
    /// How many trace rows traverse this node.
    pub visits: u64,
    /// First step whose path contains the node; newly accommodated nodes
    /// act immediately, so this is the creation step for interior nodes.
    pub created_step: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeView {
    pub child: u32,
    pub weight: String,
}

pub fn pool_view(pool: &OptionPool, trace: &[TraceRow]) -> PoolView {
    let mut visits = vec![0u64; pool.len()];
    let mut created = vec![None; pool.len()];
    for row in trace {
        for &id in &row.path {
            if let Some(v) = visits.get_mut(id as usize) {
                *v += 1;
                if created[id as usize].is_none() {
                    created[id as usize] = Some(row.step);
                }
            }
        }
    }
    PoolView {
        nodes: pool
            .nodes()
            .map(|n| NodeView {
                id: n.id.0,
                kind: match n.kind {
                    NodeKind::Interior => "interior".into(),
                    NodeKind::ActionLeaf { action } => format!("action {action}"),
                },
                value: n.value.iter().map(|&v| format_sig(v, 4)).collect(),
                children: n
                    .children
                    .iter()
                    .map(|e| EdgeView {
                        child: e.child.0,
                        weight: format_sig(e.weight, 3),
                    })
                    .collect(),
                visits: visits[n.id.index()],
                created_step: created[n.id.index()],
            })
            .collect(),
    }
}

/// Emits the pool as a DOT directed graph: one node per option node
/// (label: id, rounded value, kind), one labelled edge per child reference.
/// Node order follows ids, so equal pools export identical bytes.
pub fn export_dot(pool: &OptionPool, view: Option<&PoolView>) -> String {
    let mut out = String::from("digraph option_pool {\n  rankdir=LR;\n");
    for node in pool.nodes() {
        match node.kind {
            NodeKind::ActionLeaf { action } => {
                out.push_str(&format!(
                    "  n{} [shape=box, label=\"a{action}\"];\n",
                    node.id
                ));
            }
            NodeKind::Interior => {
                let value = node
                    .value
                    .iter()
                    .map(|&v| format_sig(v, 4))
                    .collect::<Vec<_>>()
                    .join(", ");
                let stats = view
                    .and_then(|v| v.nodes.get(node.id.index()))
                    .map(|n| format!("\\nvisits={}", n.visits))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "  n{} [shape=ellipse, label=\"{}\\n[{}]{}\"];\n",
                    node.id, node.id, value, stats
                ));
            }
        }
    }
    for node in pool.nodes() {
        for edge in &node.children {
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{}\"];\n",
                node.id,
                edge.child,
                format_sig(edge.weight, 3)
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// One hop of an explained path.
#[derive(Clone, Debug, Serialize)]
pub struct HopView {
    pub node: u32,
    /// Distance logged at decision time.
    pub distance: f64,
    /// True when the node no longer resolves in the snapshot.
    pub pruned: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionWeightView {
    pub action: usize,
    pub weight: f64,
}

/// Complete justification of one logged decision: the observation, the
/// matched node, the per-dimension weighted differences behind the distance,
/// and the candidate action weights behind the argmax.
#[derive(Clone, Debug, Serialize)]
pub struct Explanation {
    pub step: u64,
    pub episode: u32,
    pub observation: Vec<f64>,
    pub path: Vec<HopView>,
    /// Node whose action edge fired.
    pub matched: u32,
    /// Snapshot value of the matched node; None when pruned.
    pub matched_value: Option<Vec<f64>>,
    /// Per-dimension terms `w_i * |u_i - v_i|` against the matched node.
    pub weighted_diffs: Option<Vec<f64>>,
    /// Snapshot action weights at the matched node.
    pub action_weights: Vec<ActionWeightView>,
    pub chosen_action: usize,
    /// Weight lead of the chosen action over the best alternative in the
    /// snapshot (negative when the snapshot has since moved on).
    pub weight_margin: Option<f64>,
    /// True when epsilon-greedy overrode the greedy choice.
    pub exploratory: bool,
    pub reward: f64,
}

/// Explains one trace row against a pool snapshot. Nodes missing from the
/// snapshot are marked pruned instead of failing.
pub fn explain_step(row: &TraceRow, pool: &OptionPool, w: &AttentionWeights) -> Result<Explanation> {
    let resolves = |id: u32| {
        pool.contains(NodeId(id)) && pool.node(NodeId(id)).map_or(false, |n| n.kind.is_interior())
    };
    let path: Vec<HopView> = row
        .path
        .iter()
        .enumerate()
        .map(|(i, &id)| HopView {
            node: id,
            distance: row.distances.get(i).copied().unwrap_or(f64::NAN),
            pruned: !resolves(id),
        })
        .collect();
    let matched = *row.path.last().unwrap_or(&row.entry);

    let (matched_value, weighted_diffs, action_weights) = if resolves(matched) {
        let node = pool.node(NodeId(matched))?;
        let diffs: Vec<f64> = if node.value.len() == row.obs.len() && w.dim() == row.obs.len() {
            node.value
                .iter()
                .zip(row.obs.iter())
                .zip(w.components())
                .map(|((&v, &u), &wi)| wi * (u - v).abs())
                .collect()
        } else {
            Vec::new()
        };
        let mut weights: Vec<ActionWeightView> = node
            .children
            .iter()
            .filter_map(|e| match pool.kind_unchecked(e.child) {
                NodeKind::ActionLeaf { action } => Some(ActionWeightView {
                    action,
                    weight: e.weight,
                }),
                NodeKind::Interior => None,
            })
            .collect();
        weights.sort_by_key(|a| a.action);
        (
            Some(node.value.clone()),
            if diffs.is_empty() { None } else { Some(diffs) },
            weights,
        )
    } else {
        (None, None, Vec::new())
    };

    let chosen_weight = action_weights
        .iter()
        .find(|a| a.action == row.action)
        .map(|a| a.weight);
    let best_other = action_weights
        .iter()
        .filter(|a| a.action != row.action)
        .map(|a| a.weight)
        .fold(None, |acc: Option<f64>, w| {
            Some(acc.map_or(w, |a| a.max(w)))
        });
    let weight_margin = match (chosen_weight, best_other) {
        (Some(c), Some(o)) => Some(c - o),
        _ => None,
    };

    Ok(Explanation {
        step: row.step,
        episode: row.episode,
        observation: row.obs.clone(),
        path,
        matched,
        matched_value,
        weighted_diffs,
        action_weights,
        chosen_action: row.action,
        weight_margin,
        exploratory: row.exploratory,
        reward: row.reward,
    })
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "step {} (episode {})", self.step, self.episode)?;
        let obs = self
            .observation
            .iter()
            .map(|&v| format_sig(v, 4))
            .collect::<Vec<_>>()
            .join(", ");
        writeln!(f, "  observation      [{obs}]")?;
        let path = self
            .path
            .iter()
            .map(|h| {
                if h.pruned {
                    format!("{}(pruned node, d={})", h.node, format_sig(h.distance, 4))
                } else {
                    format!("{}(d={})", h.node, format_sig(h.distance, 4))
                }
            })
            .collect::<Vec<_>>()
            .join(" -> ");
        writeln!(f, "  path             {path}")?;
        match &self.matched_value {
            Some(value) => {
                let value = value
                    .iter()
                    .map(|&v| format_sig(v, 4))
                    .collect::<Vec<_>>()
                    .join(", ");
                writeln!(f, "  matched node {}  [{value}]", self.matched)?;
            }
            None => writeln!(f, "  matched node {}  (pruned node)", self.matched)?,
        }
        if let Some(diffs) = &self.weighted_diffs {
            let diffs = diffs
                .iter()
                .map(|&v| format_sig(v, 4))
                .collect::<Vec<_>>()
                .join(", ");
            writeln!(f, "  weighted |u-v|   [{diffs}]")?;
        }
        if !self.action_weights.is_empty() {
            let weights = self
                .action_weights
                .iter()
                .map(|a| format!("a{}={}", a.action, format_sig(a.weight, 4)))
                .collect::<Vec<_>>()
                .join("  ");
            writeln!(f, "  action weights   {weights}")?;
        }
        let margin = self
            .weight_margin
            .map(|m| format!(" (margin {})", format_sig(m, 4)))
            .unwrap_or_default();
        let tag = if self.exploratory {
            " [exploratory action]"
        } else {
            ""
        };
        writeln!(f, "  chosen action    {}{margin}{tag}", self.chosen_action)?;
        write!(f, "  reward           {}", format_sig(self.reward, 4))
    }
}
