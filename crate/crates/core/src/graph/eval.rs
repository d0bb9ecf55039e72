use std::collections::{HashMap, HashSet};

use crate::atom::{coerce_numeric, settle, Atom, Sequence};
use crate::error::{EvalError, EvalErrorKind, ModelError};
use crate::matrix::{ScoreMatrix, SelectionMatrix};

use super::{Graph, Node, NodeId, SOp, Scorer, Selector};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Seq(Sequence),
    Matrix(SelectionMatrix),
    Scores(ScoreMatrix),
}

/// Memoised evaluation of nodes of one graph on one input.
pub struct EvalContext<'g> {
    graph: &'g Graph,
    input: Sequence,
    memo: HashMap<NodeId, Value>,
}

impl<'g> EvalContext<'g> {
    pub fn new(graph: &'g Graph, input: Sequence) -> Result<EvalContext<'g>, EvalError> {
        if input.is_empty() {
            return Err(EvalError {
                node: NodeId(0),
                label: None,
                position: None,
                key: None,
                kind: EvalErrorKind::EmptyInput,
            });
        }
        Ok(EvalContext {
            graph,
            input,
            memo: HashMap::new(),
        })
    }

    pub fn input(&self) -> &Sequence {
        &self.input
    }

    pub fn sop(&mut self, sop: SOp) -> Result<&Sequence, EvalError> {
        match self.value(sop.0)? {
            Value::Seq(s) => Ok(s),
            _ => unreachable!("s-op handle on a non-sequence node"),
        }
    }

    pub fn selector(&mut self, selector: Selector) -> Result<&SelectionMatrix, EvalError> {
        match self.value(selector.0)? {
            Value::Matrix(m) => Ok(m),
            _ => unreachable!("selector handle on a non-matrix node"),
        }
    }

    pub fn scorer(&mut self, scorer: Scorer) -> Result<&ScoreMatrix, EvalError> {
        match self.value(scorer.0)? {
            Value::Scores(m) => Ok(m),
            _ => unreachable!("scorer handle on a non-score node"),
        }
    }

    /// Evaluates `id` and every missing dependency, children first.
    pub fn value(&mut self, id: NodeId) -> Result<&Value, EvalError> {
        if !self.memo.contains_key(&id) {
            let mut seen = HashSet::new();
            let mut stack = vec![id];
            while let Some(next) = stack.pop() {
                if self.memo.contains_key(&next) || !seen.insert(next) {
                    continue;
                }
                stack.extend(self.graph.node(next).children());
            }
            let mut pending: Vec<NodeId> = seen.into_iter().collect();
            pending.sort_unstable();
            for node in pending {
                let value = self.compute(node)?;
                self.memo.insert(node, value);
            }
        }
        Ok(&self.memo[&id])
    }

    fn seq(&self, sop: SOp) -> &Sequence {
        match &self.memo[&sop.0] {
            Value::Seq(s) => s,
            _ => unreachable!(),
        }
    }

    fn matrix(&self, selector: Selector) -> &SelectionMatrix {
        match &self.memo[&selector.0] {
            Value::Matrix(m) => m,
            _ => unreachable!(),
        }
    }

    fn error(
        &self,
        id: NodeId,
        position: Option<usize>,
        key: Option<usize>,
        kind: EvalErrorKind,
    ) -> EvalError {
        EvalError {
            node: id,
            label: self.graph.label(id).map(str::to_string),
            position,
            key,
            kind,
        }
    }

    fn compute(&self, id: NodeId) -> Result<Value, EvalError> {
        let n = self.input.len();
        let model_err = |pos: usize, e: ModelError| self.error(id, Some(pos), None, e.into());
        let value = match self.graph.node(id) {
            Node::Tokens => Value::Seq(self.input.clone()),
            Node::Indices => Value::Seq((0..n).map(|i| Atom::int(i as i64)).collect()),
            Node::Const(a) => Value::Seq(crate::atom::broadcast_const(a, n)),
            Node::Map { op, args } => {
                let inputs: Vec<&Sequence> = args.iter().map(|a| self.seq(*a)).collect();
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let operands: Vec<&Atom> = inputs.iter().map(|s| &s[i]).collect();
                    out.push(op.apply(&operands).map_err(|e| model_err(i, e))?);
                }
                Value::Seq(Sequence::new(out))
            }
            Node::Ternary {
                cond,
                then,
                otherwise,
            } => {
                let (c, t, e) = (self.seq(*cond), self.seq(*then), self.seq(*otherwise));
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let pick = c[i].as_bool().map_err(|e| model_err(i, e))?;
                    out.push(if pick { t[i].clone() } else { e[i].clone() });
                }
                Value::Seq(Sequence::new(out))
            }
            Node::Aggregate {
                selector,
                values,
                default,
            } => {
                let m = self.matrix(*selector);
                let v = self.seq(*values);
                let mut out = Vec::with_capacity(n);
                for q in 0..n {
                    out.push(self.aggregate_row(id, q, m, v, default)?);
                }
                Value::Seq(Sequence::new(out))
            }
            Node::Select {
                keys,
                queries,
                predicate,
            } => {
                let (k, qs) = (self.seq(*keys), self.seq(*queries));
                let mut bits = vec![vec![false; n]; n];
                for (q, row) in bits.iter_mut().enumerate() {
                    for (key, bit) in row.iter_mut().enumerate() {
                        *bit = predicate
                            .apply(&k[key], &qs[q])
                            .map_err(|e| self.error(id, Some(q), Some(key), e.into()))?;
                    }
                }
                Value::Matrix(SelectionMatrix::from_rows(&bits))
            }
            Node::SelectAnd(a, b) => {
                Value::Matrix(self.matrix(*a).zip_with(self.matrix(*b), |x, y| x && y))
            }
            Node::SelectOr(a, b) => {
                Value::Matrix(self.matrix(*a).zip_with(self.matrix(*b), |x, y| x || y))
            }
            Node::SelectNot(a) => Value::Matrix(self.matrix(*a).complement()),
            Node::Score { keys, queries } => {
                let numbers = |s: SOp| -> Result<Vec<f64>, EvalError> {
                    self.seq(s)
                        .iter()
                        .enumerate()
                        .map(|(i, a)| coerce_numeric(a).map_err(|e| model_err(i, e)))
                        .collect()
                };
                let (k, qs) = (numbers(*keys)?, numbers(*queries)?);
                Value::Scores(ScoreMatrix::from_fn(n, |q, key| k[key] * qs[q]))
            }
            Node::SelectBest { selector, scorer } => {
                let m = self.matrix(*selector);
                let scores = match &self.memo[&scorer.0] {
                    Value::Scores(s) => s,
                    _ => unreachable!(),
                };
                let best: Vec<Option<usize>> = (0..n)
                    .map(|q| {
                        // strict comparison keeps the lowest column among ties
                        m.selected(q)
                            .fold(None, |best: Option<usize>, k| match best {
                                Some(b) if scores.get(q, b) >= scores.get(q, k) => Some(b),
                                _ => Some(k),
                            })
                    })
                    .collect();
                Value::Matrix(SelectionMatrix::from_fn(n, |q, k| best[q] == Some(k)))
            }
        };
        Ok(value)
    }

    fn aggregate_row(
        &self,
        id: NodeId,
        q: usize,
        m: &SelectionMatrix,
        values: &Sequence,
        default: &Atom,
    ) -> Result<Atom, EvalError> {
        let selected: Vec<&Atom> = m.selected(q).map(|k| &values[k]).collect();
        match selected.as_slice() {
            [] => Ok(default.clone()),
            [only] => Ok((*only).clone()),
            [first, rest @ ..] => {
                let non_numeric = selected
                    .iter()
                    .find(|a| matches!(a, Atom::Token(_) | Atom::Null));
                if let Some(found) = non_numeric {
                    // a block of identical tokens averages to itself
                    if rest.iter().all(|a| a == first) {
                        return Ok((*first).clone());
                    }
                    return Err(self.error(
                        id,
                        Some(q),
                        None,
                        EvalErrorKind::NonNumericAverage {
                            count: selected.len(),
                            found: found.variant_name(),
                        },
                    ));
                }
                let mut sum = 0.0;
                for a in &selected {
                    sum +=
                        coerce_numeric(a).map_err(|e| self.error(id, Some(q), None, e.into()))?;
                }
                settle(sum / selected.len() as f64)
                    .map_err(|e| self.error(id, Some(q), None, e.into()))
            }
        }
    }
}

/// Evaluates any node on `input` in a fresh context.
pub fn evaluate(graph: &Graph, id: NodeId, input: &Sequence) -> Result<Value, EvalError> {
    let mut ctx = EvalContext::new(graph, input.clone())?;
    ctx.value(id).cloned()
}
