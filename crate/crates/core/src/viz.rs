//! Rendering compiled flows and selection patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::atom::Sequence;
use crate::compiler::{extract_dag, schedule};
use crate::error::EvalError;
use crate::graph::{EvalContext, Graph, Node, NodeId, Selector};
use crate::matrix::SelectionMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowFormat {
    Dot,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeatmapFormat {
    Ascii,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowNode {
    pub id: String,
    pub label: String,
    /// Display strings of the node's value on the example input.
    pub value: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowHead {
    pub id: String,
    pub selector: String,
    /// `heatmap[q][k]`: whether query position q attends to key position k.
    pub heatmap: Vec<Vec<bool>>,
    pub outputs: Vec<FlowNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowLayer {
    pub index: usize,
    pub heads: Vec<FlowHead>,
    pub ffn: Vec<FlowNode>,
}

/// A schedule annotated with values on one input.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowGraph {
    pub input: Vec<String>,
    pub embeddings: Vec<FlowNode>,
    pub embedding_ffn: Vec<FlowNode>,
    pub layers: Vec<FlowLayer>,
    /// Data dependencies between boxes, as (from id, to id).
    pub edges: Vec<(String, String)>,
}

impl FlowGraph {
    pub fn build(graph: &Graph, root: NodeId, input: &Sequence) -> Result<FlowGraph, EvalError> {
        let dag = extract_dag(graph, root);
        let sched = schedule(graph, &dag);
        let mut ctx = EvalContext::new(graph, input.clone())?;

        // which box computes each node
        let mut owner: BTreeMap<NodeId, String> = BTreeMap::new();
        let node_box = |ctx: &mut EvalContext, id: NodeId| -> Result<FlowNode, EvalError> {
            let value = match ctx.value(id)? {
                crate::graph::Value::Seq(s) => s.iter().map(|a| a.to_string()).collect(),
                _ => Vec::new(),
            };
            Ok(FlowNode {
                id: format!("n{}", id.index()),
                label: graph.describe(id),
                value,
            })
        };

        let mut embeddings = Vec::new();
        for &id in &dag.nodes {
            if matches!(graph.node(id), Node::Tokens | Node::Indices) {
                owner.insert(id, format!("n{}", id.index()));
                embeddings.push(node_box(&mut ctx, id)?);
            }
        }
        let mut embedding_ffn = Vec::new();
        for &id in &sched.embedding_ffn {
            owner.insert(id, format!("n{}", id.index()));
            embedding_ffn.push(node_box(&mut ctx, id)?);
        }
        let mut layers = Vec::new();
        for (i, layer) in sched.layers.iter().enumerate() {
            let mut heads = Vec::new();
            for head in &layer.heads {
                let id = format!("h{}_{}", i + 1, head.selector.id().index());
                let heatmap = ctx.selector(head.selector)?.rows();
                let mut outputs = Vec::new();
                for &m in &head.members {
                    owner.insert(m, id.clone());
                    outputs.push(node_box(&mut ctx, m)?);
                }
                heads.push(FlowHead {
                    id,
                    selector: graph.describe(head.selector.id()),
                    heatmap,
                    outputs,
                });
            }
            let mut ffn = Vec::new();
            for &id in &layer.ffn {
                owner.insert(id, format!("n{}", id.index()));
                ffn.push(node_box(&mut ctx, id)?);
            }
            layers.push(FlowLayer {
                index: i + 1,
                heads,
                ffn,
            });
        }

        let mut edges = BTreeSet::new();
        for (&id, target) in &owner {
            for source in box_inputs(graph, id, &owner) {
                if source != *target {
                    edges.insert((source, target.clone()));
                }
            }
        }
        Ok(FlowGraph {
            input: input.iter().map(|a| a.to_string()).collect(),
            embeddings,
            embedding_ffn,
            layers,
            edges: edges.into_iter().collect(),
        })
    }

    pub fn box_count(&self) -> usize {
        self.embeddings.len()
            + self.embedding_ffn.len()
            + self
                .layers
                .iter()
                .map(|l| l.heads.len() + l.ffn.len())
                .sum::<usize>()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from(
            "digraph flow {\n  rankdir=BT;\n  node [shape=box, fontname=\"monospace\"];\n",
        );
        let node_line = |out: &mut String, n: &FlowNode| {
            let _ = writeln!(
                out,
                "    {} [label=\"{}\\n{}\"];",
                n.id,
                escape(&n.label),
                escape(&n.value.join(" "))
            );
        };
        out.push_str("  subgraph cluster_embedding {\n    label=\"embedding\";\n");
        for n in self.embeddings.iter().chain(&self.embedding_ffn) {
            node_line(&mut out, n);
        }
        out.push_str("  }\n");
        for layer in &self.layers {
            let _ = writeln!(
                out,
                "  subgraph cluster_layer{} {{\n    label=\"layer {}\";",
                layer.index, layer.index
            );
            for head in &layer.heads {
                let mut label = format!("head: {}\\l", escape(&head.selector));
                for row in &head.heatmap {
                    let cells: String = row.iter().map(|b| if *b { '#' } else { '.' }).collect();
                    let _ = write!(label, "{cells}\\l");
                }
                for o in &head.outputs {
                    let _ = write!(
                        label,
                        "{} = {}\\l",
                        escape(&o.label),
                        escape(&o.value.join(" "))
                    );
                }
                let _ = writeln!(out, "    {} [label=\"{}\", style=rounded];", head.id, label);
            }
            for n in &layer.ffn {
                node_line(&mut out, n);
            }
            out.push_str("  }\n");
        }
        for (from, to) in &self.edges {
            let _ = writeln!(out, "  {from} -> {to};");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("flow serialises")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("input: {}\n", self.input.join(" "));
        let value_line = |out: &mut String, n: &FlowNode| {
            let _ = writeln!(out, "    {} = [{}]", n.label, n.value.join(", "));
        };
        out.push_str("embedding:\n");
        for n in self.embeddings.iter().chain(&self.embedding_ffn) {
            value_line(&mut out, n);
        }
        for layer in &self.layers {
            let _ = writeln!(out, "layer {}:", layer.index);
            for head in &layer.heads {
                let _ = writeln!(out, "  head {}", head.selector);
                let matrix = SelectionMatrix::from_rows(&head.heatmap);
                for line in ascii_grid(&matrix, &self.input).lines() {
                    let _ = writeln!(out, "    {line}");
                }
                for o in &head.outputs {
                    value_line(&mut out, o);
                }
            }
            if !layer.ffn.is_empty() {
                out.push_str("  mlp\n");
                for n in &layer.ffn {
                    value_line(&mut out, n);
                }
            }
        }
        out
    }
}

/// The boxes whose outputs feed node `id`, looking through selectors,
/// scorers and constants.
fn box_inputs(graph: &Graph, id: NodeId, owner: &BTreeMap<NodeId, String>) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    let mut stack = graph.node(id).children();
    while let Some(c) = stack.pop() {
        match owner.get(&c) {
            Some(b) => {
                found.insert(b.clone());
            }
            None => stack.extend(graph.node(c).children()),
        }
    }
    found
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the compiled flow of `root` applied to `input`.
pub fn render_flow(
    graph: &Graph,
    root: NodeId,
    input: &str,
    format: FlowFormat,
) -> Result<String, EvalError> {
    let flow = FlowGraph::build(graph, root, &Sequence::from_chars(input))?;
    Ok(match format {
        FlowFormat::Dot => flow.to_dot(),
        FlowFormat::Json => flow.to_json(),
        FlowFormat::Text => flow.to_text(),
    })
}

/// Rows are queries and columns keys, both labelled by position and token.
pub fn ascii_grid(matrix: &SelectionMatrix, tokens: &[String]) -> String {
    let width = tokens
        .iter()
        .map(|t| t.chars().count())
        .max()
        .unwrap_or(1)
        .max(1);
    let pos_width = tokens.len().saturating_sub(1).to_string().len();
    let mut out = String::new();
    let _ = write!(out, "{:pad$}", "", pad = pos_width + width + 2);
    for t in tokens {
        let _ = write!(out, " {t:>width$}");
    }
    out.push('\n');
    for (q, t) in tokens.iter().enumerate() {
        let _ = write!(out, "{q:>pos_width$} {t:>width$} ");
        for k in 0..tokens.len() {
            let cell = if matrix.get(q, k) { '█' } else { '·' };
            let _ = write!(out, " {cell:>width$}");
        }
        out.push('\n');
    }
    out
}

pub fn csv_grid(matrix: &SelectionMatrix, tokens: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("query".to_string())
        .chain(tokens.iter().enumerate().map(|(k, t)| format!("{k}:{t}")))
        .collect();
    w.write_record(&header).expect("in-memory write");
    for (q, t) in tokens.iter().enumerate() {
        let row: Vec<String> = std::iter::once(format!("{q}:{t}"))
            .chain((0..tokens.len()).map(|k| if matrix.get(q, k) { "1" } else { "0" }.to_string()))
            .collect();
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of utf-8 fields")
}

/// Renders a selector's selection pattern on `input`.
pub fn render_heatmap(
    graph: &Graph,
    sel: Selector,
    input: &str,
    format: HeatmapFormat,
) -> Result<String, EvalError> {
    let seq = Sequence::from_chars(input);
    let tokens: Vec<String> = seq.iter().map(|a| a.to_string()).collect();
    let mut ctx = EvalContext::new(graph, seq)?;
    let matrix = ctx.selector(sel)?;
    Ok(match format {
        HeatmapFormat::Ascii => ascii_grid(matrix, &tokens),
        HeatmapFormat::Csv => csv_grid(matrix, &tokens),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::Value;
    use crate::graph::Extensions;
    use crate::stdlib::Stdlib;

    fn lib() -> Stdlib {
        Stdlib::load(Extensions::default()).unwrap()
    }

    fn selector(lib: &Stdlib, name: &str) -> Selector {
        match lib.interp.get(name) {
            Some(Value::Selector(s)) => *s,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flip_heatmap_is_anti_diagonal() {
        let lib = lib();
        let text = render_heatmap(
            &lib.interp.graph,
            selector(&lib, "flip"),
            "hey",
            HeatmapFormat::Ascii,
        )
        .unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows, vec!["0 h  · · █", "1 e  · █ ·", "2 y  █ · ·"]);
    }

    #[test]
    fn select_all_csv() {
        let lib = lib();
        let csv = render_heatmap(
            &lib.interp.graph,
            selector(&lib, "select_all"),
            "ab",
            HeatmapFormat::Csv,
        )
        .unwrap();
        assert_eq!(csv, "query,0:a,1:b\n0:a,1,1\n1:b,1,1\n");
    }

    #[test]
    fn tokens_flow_is_a_single_box() {
        let lib = lib();
        let t = lib.sop("reverse").unwrap();
        let tokens = lib.interp.graph.node(t.id()).children()[1];
        let flow =
            FlowGraph::build(&lib.interp.graph, tokens, &Sequence::from_chars("ab")).unwrap();
        assert_eq!(flow.box_count(), 1);
        assert!(flow.layers.is_empty());
        assert!(flow.edges.is_empty());
    }

    #[test]
    fn reverse_flow() {
        let lib = lib();
        let g = &lib.interp.graph;
        let flow = FlowGraph::build(
            g,
            lib.sop("reverse").unwrap().id(),
            &Sequence::from_chars("abcde"),
        )
        .unwrap();
        assert_eq!(flow.layers.len(), 2);
        let flip = &flow.layers[1].heads[0];
        for (q, row) in flip.heatmap.iter().enumerate() {
            for (k, cell) in row.iter().enumerate() {
                assert_eq!(*cell, q + k == 4);
            }
        }
        assert_eq!(flip.outputs[0].value.join(""), "edcba");
        let dot = flow.to_dot();
        assert!(dot.starts_with("digraph flow {"));
        assert_eq!(dot.matches(" -> ").count(), flow.edges.len());
    }

    #[test]
    fn hist_flow_attends_to_bos() {
        let lib = lib();
        let json = render_flow(
            &lib.interp.graph,
            lib.sop("hist_bos").unwrap().id(),
            "§aabbaabb",
            FlowFormat::Json,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let heads = v["layers"][0]["heads"].as_array().unwrap();
        assert_eq!(v["layers"].as_array().unwrap().len(), 1);
        assert_eq!(heads.len(), 1);
        let input = "§aabbaabb".chars().collect::<Vec<_>>();
        let heatmap = &heads[0]["heatmap"];
        for q in 1..input.len() {
            for k in 0..input.len() {
                let expected = k == 0 || input[k] == input[q];
                assert_eq!(heatmap[q][k], expected, "({q},{k})");
            }
        }
    }

    #[test]
    fn text_flow_lists_layers() {
        let lib = lib();
        let text = render_flow(
            &lib.interp.graph,
            lib.sop("reverse").unwrap().id(),
            "hey",
            FlowFormat::Text,
        )
        .unwrap();
        assert!(text.contains("layer 2:"));
        assert!(text.contains("reverse = [y, e, h]"));
    }
}
