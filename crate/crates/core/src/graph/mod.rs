//! The s-op / selector DAG.
//!
//! A [`Graph`] is an arena of hash-consed nodes: building a node that is
//! structurally identical to an existing one returns the existing id. Children
//! are always created before their parents, so ascending id order is a
//! topological order of the whole arena.

mod eval;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::atom::{Atom, Predicate};
use crate::error::BuildError;
use crate::ops::Op;

pub use eval::{evaluate, EvalContext, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle to a node that evaluates to a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SOp(pub(crate) NodeId);

/// Handle to a node that evaluates to a selection matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selector(pub(crate) NodeId);

/// Handle to a node that evaluates to a score matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scorer(pub(crate) NodeId);

macro_rules! node_handle {
    ($($t:ident),*) => {$(
        impl $t {
            pub fn id(self) -> NodeId {
                self.0
            }
        }
    )*};
}
node_handle!(SOp, Selector, Scorer);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Tokens,
    Indices,
    Const(Atom),
    Map {
        op: Op,
        args: Vec<SOp>,
    },
    Ternary {
        cond: SOp,
        then: SOp,
        otherwise: SOp,
    },
    Aggregate {
        selector: Selector,
        values: SOp,
        default: Atom,
    },
    Select {
        keys: SOp,
        queries: SOp,
        predicate: Predicate,
    },
    SelectAnd(Selector, Selector),
    SelectOr(Selector, Selector),
    SelectNot(Selector),
    SelectBest {
        selector: Selector,
        scorer: Scorer,
    },
    Score {
        keys: SOp,
        queries: SOp,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    SOp,
    Selector,
    Scorer,
}

impl Node {
    pub fn kind(&self) -> NodeKind {
        match self {
            Node::Tokens
            | Node::Indices
            | Node::Const(_)
            | Node::Map { .. }
            | Node::Ternary { .. }
            | Node::Aggregate { .. } => NodeKind::SOp,
            Node::Score { .. } => NodeKind::Scorer,
            _ => NodeKind::Selector,
        }
    }

    /// Direct children, in a fixed order.
    pub fn children(&self) -> Vec<NodeId> {
        match self {
            Node::Tokens | Node::Indices | Node::Const(_) => vec![],
            Node::Map { args, .. } => args.iter().map(|a| a.0).collect(),
            Node::Ternary {
                cond,
                then,
                otherwise,
            } => vec![cond.0, then.0, otherwise.0],
            Node::Aggregate {
                selector, values, ..
            } => vec![selector.0, values.0],
            Node::Select { keys, queries, .. } | Node::Score { keys, queries } => {
                vec![keys.0, queries.0]
            }
            Node::SelectAnd(a, b) | Node::SelectOr(a, b) => vec![a.0, b.0],
            Node::SelectNot(a) => vec![a.0],
            Node::SelectBest { selector, scorer } => vec![selector.0, scorer.0],
        }
    }
}

/// Optional language extensions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Extensions {
    /// Enables `score` and `select_best`.
    pub select_best: bool,
}

#[derive(Clone, Debug)]
struct Label {
    name: String,
    global: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    interned: HashMap<Node, NodeId>,
    labels: Vec<Option<Label>>,
    extensions: Extensions,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    pub fn with_extensions(extensions: Extensions) -> Graph {
        Graph {
            extensions,
            ..Graph::default()
        }
    }

    pub fn extensions(&self) -> Extensions {
        self.extensions
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(id) = self.interned.get(&node) {
            return *id;
        }
        let id = NodeId(u32::try_from(self.nodes.len()).expect("graph exceeds u32 nodes"));
        self.nodes.push(node.clone());
        self.labels.push(None);
        self.interned.insert(node, id);
        id
    }

    /// Attaches a display name to a node. Top-level names replace names given
    /// inside function bodies; otherwise the first name sticks.
    pub fn set_label(&mut self, id: NodeId, name: &str, global: bool) {
        let slot = &mut self.labels[id.index()];
        let replace = match slot {
            None => true,
            Some(existing) => global && !existing.global,
        };
        if replace {
            *slot = Some(Label {
                name: name.to_string(),
                global,
            });
        }
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.labels[id.index()].as_ref().map(|l| l.name.as_str())
    }

    pub fn tokens(&mut self) -> SOp {
        SOp(self.intern(Node::Tokens))
    }

    pub fn indices(&mut self) -> SOp {
        SOp(self.intern(Node::Indices))
    }

    pub fn constant(&mut self, atom: Atom) -> SOp {
        SOp(self.intern(Node::Const(atom)))
    }

    pub fn as_const(&self, sop: SOp) -> Option<&Atom> {
        match self.node(sop.0) {
            Node::Const(a) => Some(a),
            _ => None,
        }
    }

    /// Positionwise operation. Folds to a constant when every operand is one.
    pub fn map(&mut self, op: Op, args: &[SOp]) -> Result<SOp, BuildError> {
        assert_eq!(args.len(), op.arity(), "wrong operand count for `{op}`");
        let constants: Option<Vec<&Atom>> = args.iter().map(|a| self.as_const(*a)).collect();
        if let Some(atoms) = constants {
            let folded = op.apply(&atoms)?;
            return Ok(self.constant(folded));
        }
        Ok(SOp(self.intern(Node::Map {
            op,
            args: args.to_vec(),
        })))
    }

    pub fn unary(&mut self, op: Op, arg: SOp) -> Result<SOp, BuildError> {
        self.map(op, &[arg])
    }

    pub fn binary(&mut self, op: Op, lhs: SOp, rhs: SOp) -> Result<SOp, BuildError> {
        self.map(op, &[lhs, rhs])
    }

    /// `then if cond else otherwise`. A constant condition picks its branch at
    /// build time.
    pub fn ternary(&mut self, cond: SOp, then: SOp, otherwise: SOp) -> Result<SOp, BuildError> {
        if let Some(c) = self.as_const(cond) {
            return Ok(if c.as_bool()? { then } else { otherwise });
        }
        Ok(SOp(self.intern(Node::Ternary {
            cond,
            then,
            otherwise,
        })))
    }

    pub fn select(&mut self, keys: SOp, queries: SOp, predicate: Predicate) -> Selector {
        Selector(self.intern(Node::Select {
            keys,
            queries,
            predicate,
        }))
    }

    /// `select(1, 1, ==)`.
    pub fn select_all(&mut self) -> Selector {
        let one = self.constant(Atom::int(1));
        self.select(one, one, Predicate::Eq)
    }

    pub fn select_and(&mut self, a: Selector, b: Selector) -> Selector {
        Selector(self.intern(Node::SelectAnd(a, b)))
    }

    pub fn select_or(&mut self, a: Selector, b: Selector) -> Selector {
        Selector(self.intern(Node::SelectOr(a, b)))
    }

    pub fn select_not(&mut self, a: Selector) -> Selector {
        Selector(self.intern(Node::SelectNot(a)))
    }

    pub fn aggregate(&mut self, selector: Selector, values: SOp, default: Atom) -> SOp {
        SOp(self.intern(Node::Aggregate {
            selector,
            values,
            default,
        }))
    }

    /// `round(1 / aggregate(select_all, indicator(indices == 0)))`.
    pub fn length(&mut self) -> SOp {
        let indices = self.indices();
        let zero = self.constant(Atom::int(0));
        let one = self.constant(Atom::int(1));
        let first = self
            .binary(Op::Compare(Predicate::Eq), indices, zero)
            .expect("non-constant");
        let light = self.unary(Op::Indicator, first).expect("non-constant");
        let all = self.select_all();
        let frac = self.aggregate(all, light, Atom::int(0));
        let reciprocal = self.binary(Op::Div, one, frac).expect("non-constant");
        self.unary(Op::Round, reciprocal).expect("non-constant")
    }

    /// Broadcasts whether `value` occurs anywhere in `seq`.
    pub fn contains(&mut self, value: Atom, seq: SOp) -> SOp {
        let query = self.constant(value);
        let one = self.constant(Atom::int(1));
        let zero = self.constant(Atom::int(0));
        let matches = self.select(seq, query, Predicate::Eq);
        let hits = self.aggregate(matches, one, Atom::int(0));
        // folds only if `seq` is a constant, which cannot make the comparison fail
        self.binary(Op::Compare(Predicate::Gt), hits, zero)
            .expect("comparison of numbers")
    }

    /// Number of keys each query selects, expanded into two aggregations (or
    /// one when position 0 holds a beginning-of-sequence token that should
    /// not be counted).
    pub fn selector_width(&mut self, selector: Selector, assume_bos: bool) -> SOp {
        let indices = self.indices();
        let zero = self.constant(Atom::int(0));
        let one = self.constant(Atom::int(1));
        let is_first = self
            .binary(Op::Compare(Predicate::Eq), indices, zero)
            .expect("non-constant");
        let light0 = self.unary(Op::Indicator, is_first).expect("non-constant");
        let at_zero = self.select(indices, zero, Predicate::Eq);
        let or0 = self.select_or(selector, at_zero);
        let and0 = self.select_and(selector, at_zero);
        let or0_frac = self.aggregate(or0, light0, Atom::int(0));
        let or0_width = self.binary(Op::Div, one, or0_frac).expect("non-constant");
        let and0_width = self.aggregate(and0, light0, Atom::int(0));
        let bos_res = self.binary(Op::Sub, or0_width, one).expect("non-constant");
        let nobos_res = self
            .binary(Op::Add, bos_res, and0_width)
            .expect("non-constant");

        let name = format!("selector_width({})", self.describe(selector.0));
        self.set_label(or0.0, &format!("{name}/or0"), false);
        self.set_label(and0.0, &format!("{name}/and0"), false);
        let result = if assume_bos { bos_res } else { nobos_res };
        self.unary(Op::Round, result).expect("non-constant")
    }

    pub fn score(&mut self, keys: SOp, queries: SOp) -> Result<Scorer, BuildError> {
        if !self.extensions.select_best {
            return Err(BuildError::ExtensionDisabled("score"));
        }
        Ok(Scorer(self.intern(Node::Score { keys, queries })))
    }

    pub fn select_best(
        &mut self,
        selector: Selector,
        scorer: Scorer,
    ) -> Result<Selector, BuildError> {
        if !self.extensions.select_best {
            return Err(BuildError::ExtensionDisabled("select_best"));
        }
        Ok(Selector(self.intern(Node::SelectBest { selector, scorer })))
    }

    /// Short human-readable rendering: the node's label if it has one,
    /// otherwise its structure with labelled children abbreviated.
    pub fn describe(&self, id: NodeId) -> String {
        if let Some(name) = self.label(id) {
            return name.to_string();
        }
        self.describe_structure(id)
    }

    /// Like [`Graph::describe`] but never abbreviates the node itself.
    pub fn describe_structure(&self, id: NodeId) -> String {
        let d = |c: NodeId| self.describe(c);
        match self.node(id) {
            Node::Tokens => "tokens".into(),
            Node::Indices => "indices".into(),
            Node::Const(Atom::Token(t)) => format!("{:?}", &**t),
            Node::Const(a) => a.to_string(),
            Node::Map { op, args } => match (op, args.as_slice()) {
                (Op::Neg, [a]) => format!("-{}", d(a.0)),
                (Op::Not, [a]) => format!("not {}", d(a.0)),
                (Op::In(list), [a]) => format!("{} in {}", d(a.0), render_list(list)),
                (Op::Index(list), [a]) => format!("{}[{}]", render_list(list), d(a.0)),
                (op, [a]) => format!("{op}({})", d(a.0)),
                (op, [a, b]) => format!("({} {op} {})", d(a.0), d(b.0)),
                _ => unreachable!("operand count checked at build time"),
            },
            Node::Ternary {
                cond,
                then,
                otherwise,
            } => format!("({} if {} else {})", d(then.0), d(cond.0), d(otherwise.0)),
            Node::Aggregate {
                selector,
                values,
                default,
            } => {
                if *default == Atom::int(0) {
                    format!("aggregate({}, {})", d(selector.0), d(values.0))
                } else {
                    format!("aggregate({}, {}, {default})", d(selector.0), d(values.0))
                }
            }
            Node::Select {
                keys,
                queries,
                predicate,
            } => format!("select({}, {}, {predicate})", d(keys.0), d(queries.0)),
            Node::SelectAnd(a, b) => format!("({} and {})", d(a.0), d(b.0)),
            Node::SelectOr(a, b) => format!("({} or {})", d(a.0), d(b.0)),
            Node::SelectNot(a) => format!("not {}", d(a.0)),
            Node::SelectBest { selector, scorer } => {
                format!("select_best({}, {})", d(selector.0), d(scorer.0))
            }
            Node::Score { keys, queries } => format!("score({}, {})", d(keys.0), d(queries.0)),
        }
    }
}

fn render_list(list: &[Atom]) -> String {
    let items: Vec<String> = list
        .iter()
        .map(|a| match a {
            Atom::Token(t) => format!("{:?}", &**t),
            other => other.to_string(),
        })
        .collect();
    format!("[{}]", items.join(", "))
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structurally_equal_nodes_share_ids() {
        let mut g = Graph::new();
        let a = g.indices();
        let b = g.indices();
        let s1 = g.select(a, a, Predicate::Le);
        let s2 = g.select(b, b, Predicate::Le);
        assert_eq!(s1, s2);
        let s3 = g.select(a, a, Predicate::Lt);
        assert_ne!(s1, s3);
    }

    #[test]
    fn ids_are_topological() {
        let mut g = Graph::new();
        let len = g.length();
        let sw = {
            let t = g.tokens();
            let same = g.select(t, t, Predicate::Eq);
            g.selector_width(same, false)
        };
        for id in [len.0, sw.0] {
            for child in g.node(id).children() {
                assert!(child < id);
            }
        }
        for i in 0..g.len() {
            let id = NodeId(i as u32);
            assert!(g.node(id).children().iter().all(|c| *c < id));
        }
    }

    #[test]
    fn constant_operands_fold() {
        let mut g = Graph::new();
        let one = g.constant(Atom::int(1));
        let two = g.constant(Atom::int(2));
        let sum = g.binary(Op::Add, one, two).unwrap();
        assert_eq!(g.as_const(sum), Some(&Atom::int(3)));
        let zero = g.constant(Atom::int(0));
        assert!(g.binary(Op::Div, one, zero).is_err());
    }

    #[test]
    fn constant_condition_picks_branch() {
        let mut g = Graph::new();
        let t = g.tokens();
        let i = g.indices();
        let yes = g.constant(Atom::Bool(true));
        assert_eq!(g.ternary(yes, t, i).unwrap(), t);
        let no = g.constant(Atom::Bool(false));
        assert_eq!(g.ternary(no, t, i).unwrap(), i);
    }

    #[test]
    fn extension_gate() {
        let mut g = Graph::new();
        let i = g.indices();
        assert_eq!(g.score(i, i), Err(BuildError::ExtensionDisabled("score")));
        let mut g = Graph::with_extensions(Extensions { select_best: true });
        let i = g.indices();
        assert!(g.score(i, i).is_ok());
    }

    #[test]
    fn labels_prefer_top_level_names() {
        let mut g = Graph::new();
        let t = g.tokens();
        let s = g.select(t, t, Predicate::Eq);
        assert_eq!(g.describe(s.0), "select(tokens, tokens, ==)");
        g.set_label(s.0, "local", false);
        g.set_label(s.0, "other_local", false);
        assert_eq!(g.label(s.0), Some("local"));
        g.set_label(s.0, "same_tok", true);
        g.set_label(s.0, "later", true);
        assert_eq!(g.label(s.0), Some("same_tok"));
    }
}
