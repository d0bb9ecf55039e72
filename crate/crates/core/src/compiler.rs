//! Scheduling an s-op's DAG onto an abstract transformer.
//!
//! Every aggregation is an attention head one layer above everything it
//! reads. Aggregations in the same layer that use the same selector node
//! share a head. Elementwise nodes go to the feed-forward block of the
//! layer that produces their last operand.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::graph::{Graph, Node, NodeId, Selector};

/// The nodes reachable from a root, in ascending (topological) id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    pub root: NodeId,
    pub nodes: Vec<NodeId>,
}

impl Dag {
    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.binary_search(&id).is_ok()
    }

    pub fn aggregates<'a>(&'a self, graph: &'a Graph) -> impl Iterator<Item = NodeId> + 'a {
        self.nodes
            .iter()
            .copied()
            .filter(|id| matches!(graph.node(*id), Node::Aggregate { .. }))
    }
}

pub fn extract_dag(graph: &Graph, root: NodeId) -> Dag {
    let mut seen = HashSet::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if seen.insert(id) {
            stack.extend(graph.node(id).children());
        }
    }
    let mut nodes: Vec<NodeId> = seen.into_iter().collect();
    nodes.sort_unstable();
    Dag { root, nodes }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadGroup {
    pub selector: Selector,
    /// 1-based.
    pub layer: usize,
    /// Aggregate nodes computed by this head, ascending.
    pub members: Vec<NodeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Layer {
    pub heads: Vec<HeadGroup>,
    pub ffn: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub layers: Vec<Layer>,
    /// Elementwise nodes that need no attention at all.
    pub embedding_ffn: Vec<NodeId>,
    pub depth: BTreeMap<NodeId, usize>,
}

impl Schedule {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn heads_per_layer(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.heads.len()).collect()
    }

    pub fn max_heads(&self) -> usize {
        self.layers.iter().map(|l| l.heads.len()).max().unwrap_or(0)
    }

    pub fn total_heads(&self) -> usize {
        self.layers.iter().map(|l| l.heads.len()).sum()
    }

    pub fn depth_of(&self, id: NodeId) -> Option<usize> {
        self.depth.get(&id).copied()
    }
}

/// Depth of every node in `dag`: the number of attention layers needed
/// before its value is available.
pub fn depths(graph: &Graph, dag: &Dag) -> BTreeMap<NodeId, usize> {
    let mut depth: BTreeMap<NodeId, usize> = BTreeMap::new();
    for &id in &dag.nodes {
        let d = |c: NodeId| depth[&c];
        let value = match graph.node(id) {
            Node::Aggregate {
                selector, values, ..
            } => 1 + d(selector.id()).max(d(values.id())),
            node => node.children().into_iter().map(d).max().unwrap_or(0),
        };
        depth.insert(id, value);
    }
    depth
}

pub fn schedule(graph: &Graph, dag: &Dag) -> Schedule {
    let depth = depths(graph, dag);
    let num_layers = dag
        .aggregates(graph)
        .map(|id| depth[&id])
        .max()
        .unwrap_or(0);
    let mut layers = vec![Layer::default(); num_layers];
    let mut groups: BTreeMap<(usize, Selector), Vec<NodeId>> = BTreeMap::new();
    let mut embedding_ffn = Vec::new();
    for &id in &dag.nodes {
        let d = depth[&id];
        match graph.node(id) {
            Node::Aggregate { selector, .. } => groups.entry((d, *selector)).or_default().push(id),
            Node::Map { .. } | Node::Ternary { .. } => {
                if d == 0 {
                    embedding_ffn.push(id);
                } else {
                    layers[d - 1].ffn.push(id);
                }
            }
            _ => {}
        }
    }
    for ((layer, selector), members) in groups {
        layers[layer - 1].heads.push(HeadGroup {
            selector,
            layer,
            members,
        });
    }
    Schedule {
        layers,
        embedding_ffn,
        depth,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeadReport {
    pub selector: String,
    pub values: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerReport {
    pub index: usize,
    pub heads: Vec<HeadReport>,
    pub ffn: Vec<String>,
}

/// Size summary of a compiled s-op. `max_heads` is the widest layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArchReport {
    pub layers: Vec<LayerReport>,
    pub num_layers: usize,
    pub heads_per_layer: Vec<usize>,
    pub max_heads: usize,
    pub total_heads: usize,
    /// Elementwise work done on the embeddings, before the first layer.
    pub embedding_ffn: Vec<String>,
}

pub fn report(graph: &Graph, schedule: &Schedule) -> ArchReport {
    let names = |ids: &[NodeId]| ids.iter().map(|id| graph.describe(*id)).collect::<Vec<_>>();
    let layers = schedule
        .layers
        .iter()
        .enumerate()
        .map(|(i, layer)| LayerReport {
            index: i + 1,
            heads: layer
                .heads
                .iter()
                .map(|h| HeadReport {
                    selector: graph.describe(h.selector.id()),
                    values: h
                        .members
                        .iter()
                        .map(|m| match graph.node(*m) {
                            Node::Aggregate { values, .. } => graph.describe(values.id()),
                            _ => unreachable!("head member is an aggregate"),
                        })
                        .collect(),
                    outputs: names(&h.members),
                })
                .collect(),
            ffn: names(&layer.ffn),
        })
        .collect();
    ArchReport {
        layers,
        num_layers: schedule.num_layers(),
        heads_per_layer: schedule.heads_per_layer(),
        max_heads: schedule.max_heads(),
        total_heads: schedule.total_heads(),
        embedding_ffn: names(&schedule.embedding_ffn),
    }
}

/// Extracts, schedules and summarises the DAG under `root`.
pub fn compile_report(graph: &Graph, root: NodeId) -> ArchReport {
    let dag = extract_dag(graph, root);
    report(graph, &schedule(graph, &dag))
}

impl ArchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

impl std::fmt::Display for ArchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} layers, heads per layer {:?} (max {}, total {})",
            self.num_layers, self.heads_per_layer, self.max_heads, self.total_heads
        )?;
        if !self.embedding_ffn.is_empty() {
            writeln!(f, "embedding mlp: {}", self.embedding_ffn.join("; "))?;
        }
        for layer in &self.layers {
            writeln!(f, "layer {}:", layer.index)?;
            for head in &layer.heads {
                writeln!(f, "  head {} <- {}", head.selector, head.values.join(", "))?;
            }
            if !layer.ffn.is_empty() {
                writeln!(f, "  mlp: {}", layer.ffn.join("; "))?;
            }
        }
        Ok(())
    }
}
