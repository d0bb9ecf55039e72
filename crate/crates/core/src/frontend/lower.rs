//! Lowering of parsed statements into graph nodes.
//!
//! Functions are macros: a call lowers the body with the arguments bound,
//! so a whole program becomes one DAG. Lists exist only at lowering time.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::atom::{Atom, Predicate};
use crate::error::{BuildError, Error, LowerError, LowerErrorKind};
use crate::graph::{Extensions, Graph, NodeId, SOp, Scorer, Selector};
use crate::ops::Op;

use super::ast::{Arg, BinaryOp, Expr, ExprKind, FunctionDef, Stmt, UnaryOp};
use super::lexer::Span;
use super::parser::parse_source;

/// Maximum depth of nested function expansion.
pub const RECURSION_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Select,
    Aggregate,
    SelectorWidth,
    Indicator,
    SelectEq,
    Round,
    Score,
    SelectBest,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Select => "select",
            Builtin::Aggregate => "aggregate",
            Builtin::SelectorWidth => "selector_width",
            Builtin::Indicator => "indicator",
            Builtin::SelectEq => "select_eq",
            Builtin::Round => "round",
            Builtin::Score => "score",
            Builtin::SelectBest => "select_best",
        }
    }
}

/// Names bound before any user code runs.
pub const BUILTIN_NAMES: &[&str] = &[
    "tokens",
    "indices",
    "length",
    "select_all",
    "select",
    "aggregate",
    "selector_width",
    "indicator",
    "select_eq",
    "round",
    "score",
    "select_best",
];

#[derive(Debug)]
pub struct Closure {
    pub def: FunctionDef,
    captured: Option<Rc<Frame>>,
}

/// A lowered value.
#[derive(Clone, Debug)]
pub enum Value {
    Atom(Atom),
    SOp(SOp),
    Selector(Selector),
    Scorer(Scorer),
    Predicate(Predicate),
    /// A static list, known at lowering time.
    List(Vec<Atom>),
    Function(Rc<Closure>),
    Builtin(Builtin),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Atom(Atom::Token(_)) => "a string",
            Value::Atom(Atom::Number(_)) => "a number",
            Value::Atom(Atom::Bool(_)) => "a bool",
            Value::Atom(Atom::Null) => "a null",
            Value::SOp(_) => "an s-op",
            Value::Selector(_) => "a selector",
            Value::Scorer(_) => "a scorer",
            Value::Predicate(_) => "a comparison",
            Value::List(_) => "a list",
            Value::Function(_) | Value::Builtin(_) => "a function",
        }
    }

    /// The graph node behind this value, if it has one.
    pub fn node(&self) -> Option<NodeId> {
        match self {
            Value::SOp(s) => Some(s.id()),
            Value::Selector(s) => Some(s.id()),
            Value::Scorer(s) => Some(s.id()),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => write!(f, "{a}"),
            Value::List(items) => {
                let items: Vec<String> = items.iter().map(Atom::to_string).collect();
                write!(f, "[{}]", items.join(", "))
            }
            Value::Predicate(p) => f.write_str(p.symbol()),
            Value::Function(c) => write!(f, "<function {}>", c.def.name),
            Value::Builtin(b) => write!(f, "<built-in {}>", b.name()),
            other => f.write_str(other.kind_name()),
        }
    }
}

/// Local scope of one function expansion.
#[derive(Clone, Debug, Default)]
struct Frame {
    vars: HashMap<String, Value>,
    parent: Option<Rc<Frame>>,
}

impl Frame {
    fn get(&self, name: &str) -> Option<&Value> {
        match self.vars.get(name) {
            Some(v) => Some(v),
            None => self.parent.as_deref().and_then(|p| p.get(name)),
        }
    }
}

/// Top-level bindings, in first-binding order.
#[derive(Clone, Debug, Default)]
pub struct Env {
    vars: HashMap<String, Value>,
    order: Vec<String>,
}

impl Env {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    fn insert(&mut self, name: &str, value: Value) {
        if self.vars.insert(name.to_string(), value).is_none() {
            self.order.push(name.to_string());
        }
    }

    /// User-visible names (built-ins excluded), in binding order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order
            .iter()
            .map(String::as_str)
            .filter(|n| !BUILTIN_NAMES.contains(n))
    }
}

/// What executing a single statement produced.
#[derive(Clone, Debug)]
pub enum Outcome {
    Bound { name: String, value: Value },
    Defined { name: String },
    Value(Value),
    SetExample(String),
    Draw { value: Value, input: String },
}

/// A graph plus the top-level environment that names its nodes.
pub struct Interpreter {
    pub graph: Graph,
    pub env: Env,
    depth: usize,
}

impl Interpreter {
    pub fn new(extensions: Extensions) -> Interpreter {
        let mut graph = Graph::with_extensions(extensions);
        let mut env = Env::default();
        let tokens = graph.tokens();
        let indices = graph.indices();
        let length = graph.length();
        let select_all = graph.select_all();
        for (name, id) in [
            ("tokens", tokens.id()),
            ("indices", indices.id()),
            ("length", length.id()),
        ] {
            graph.set_label(id, name, true);
        }
        graph.set_label(select_all.id(), "select_all", true);
        env.insert("tokens", Value::SOp(tokens));
        env.insert("indices", Value::SOp(indices));
        env.insert("length", Value::SOp(length));
        env.insert("select_all", Value::Selector(select_all));
        for b in [
            Builtin::Select,
            Builtin::Aggregate,
            Builtin::SelectorWidth,
            Builtin::Indicator,
            Builtin::SelectEq,
            Builtin::Round,
            Builtin::Score,
            Builtin::SelectBest,
        ] {
            env.insert(b.name(), Value::Builtin(b));
        }
        Interpreter {
            graph,
            env,
            depth: 0,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.env.get(name)
    }

    /// Parses and runs `source`, stopping at the first error. Statements
    /// before the failing one keep their effect.
    pub fn exec(&mut self, source: &str) -> Result<Vec<Outcome>, Error> {
        let stmts = parse_source(source)?;
        let mut outcomes = Vec::with_capacity(stmts.len());
        for stmt in &stmts {
            outcomes.push(self.exec_stmt(stmt)?);
        }
        Ok(outcomes)
    }

    pub fn exec_stmt(&mut self, stmt: &Stmt) -> Result<Outcome, LowerError> {
        match stmt {
            Stmt::Assign { name, value, span } => {
                self.check_rebind(name, *span)?;
                let value = self.lower(value, None)?;
                if let Some(id) = value.node() {
                    self.graph.set_label(id, name, true);
                }
                self.env.insert(name, value.clone());
                Ok(Outcome::Bound {
                    name: name.clone(),
                    value,
                })
            }
            Stmt::Def(def) => {
                self.check_rebind(&def.name, def.span)?;
                let closure = Closure {
                    def: def.clone(),
                    captured: None,
                };
                self.env
                    .insert(&def.name, Value::Function(Rc::new(closure)));
                Ok(Outcome::Defined {
                    name: def.name.clone(),
                })
            }
            Stmt::Expr(e) => Ok(Outcome::Value(self.lower(e, None)?)),
            Stmt::Return(e) => Err(LowerError {
                kind: LowerErrorKind::ReturnOutsideFunction,
                span: e.span,
            }),
            Stmt::SetExample { value, .. } => Ok(Outcome::SetExample(value.clone())),
            Stmt::Draw { target, input, .. } => Ok(Outcome::Draw {
                value: self.lower(target, None)?,
                input: input.clone(),
            }),
        }
    }

    fn check_rebind(&self, name: &str, span: Span) -> Result<(), LowerError> {
        if BUILTIN_NAMES.contains(&name) {
            return Err(LowerError {
                kind: LowerErrorKind::BuiltinRebind(name.to_string()),
                span,
            });
        }
        Ok(())
    }

    fn lookup(&self, name: &str, local: Option<&Frame>) -> Option<Value> {
        local
            .and_then(|f| f.get(name))
            .or_else(|| self.env.get(name))
            .cloned()
    }

    /// Lowers one expression. `local` is the current function frame, if any.
    fn lower(&mut self, expr: &Expr, local: Option<&mut Frame>) -> Result<Value, LowerError> {
        let mut local = local;
        self.lower_in(expr, &mut local)
    }

    fn lower_in(
        &mut self,
        expr: &Expr,
        local: &mut Option<&mut Frame>,
    ) -> Result<Value, LowerError> {
        let span = expr.span;
        let err = |kind| LowerError { kind, span };
        let build = |e: BuildError| LowerError {
            kind: LowerErrorKind::Build(e),
            span,
        };
        match &expr.kind {
            ExprKind::Number(x) => Atom::number(*x)
                .map(Value::Atom)
                .map_err(|e| build(e.into())),
            ExprKind::Str(s) => Atom::token(s.as_str())
                .map(Value::Atom)
                .map_err(|e| build(e.into())),
            ExprKind::Bool(b) => Ok(Value::Atom(Atom::Bool(*b))),
            ExprKind::Predicate(p) => Ok(Value::Predicate(*p)),
            ExprKind::Ident(name) => self
                .lookup(name, local.as_deref())
                .ok_or_else(|| err(LowerErrorKind::Unbound(name.clone()))),
            ExprKind::Unary { op, expr: inner } => {
                let v = self.lower_in(inner, local)?;
                match (op, v) {
                    (UnaryOp::Not, Value::Selector(s)) => {
                        Ok(Value::Selector(self.graph.select_not(s)))
                    }
                    (UnaryOp::Not, v) => self.elementwise(Op::Not, &[v], span),
                    (UnaryOp::Neg, v) => self.elementwise(Op::Neg, &[v], span),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.lower_in(lhs, local)?;
                let r = self.lower_in(rhs, local)?;
                self.binary(*op, l, r, span)
            }
            ExprKind::Ternary {
                then,
                cond,
                otherwise,
            } => match self.lower_in(cond, local)? {
                Value::Atom(c) => {
                    let c = c.as_bool().map_err(|e| build(e.into()))?;
                    self.lower_in(if c { then } else { otherwise }, local)
                }
                Value::SOp(c) => {
                    let t = self.lower_in(then, local)?;
                    let o = self.lower_in(otherwise, local)?;
                    let t = self.coerce_sop(t, then.span)?;
                    let o = self.coerce_sop(o, otherwise.span)?;
                    self.graph.ternary(c, t, o).map(Value::SOp).map_err(build)
                }
                other => Err(err(LowerErrorKind::Type(format!(
                    "a condition must be a bool or an s-op, found {}",
                    other.kind_name()
                )))),
            },
            ExprKind::Call { callee, args } => {
                let f = self
                    .lookup(callee, local.as_deref())
                    .ok_or_else(|| err(LowerErrorKind::Unbound(callee.clone())))?;
                let mut lowered = Vec::with_capacity(args.len());
                for Arg { name, value } in args {
                    lowered.push((name.clone(), self.lower_in(value, local)?, value.span));
                }
                match f {
                    Value::Builtin(b) => self.call_builtin(b, lowered, span),
                    Value::Function(c) => self.call_function(&c, lowered, span),
                    _ => Err(err(LowerErrorKind::NotCallable(callee.clone()))),
                }
            }
            ExprKind::List(items) => {
                let mut atoms = Vec::with_capacity(items.len());
                for item in items {
                    match self.lower_in(item, local)? {
                        Value::Atom(a) => atoms.push(a),
                        other => {
                            return Err(LowerError {
                                kind: LowerErrorKind::NotStatic(format!(
                                    "{} in a list literal",
                                    other.kind_name()
                                )),
                                span: item.span,
                            })
                        }
                    }
                }
                Ok(Value::List(atoms))
            }
            ExprKind::Comprehension { body, var, iter } => {
                let items = match self.lower_in(iter, local)? {
                    Value::List(items) => items,
                    Value::Atom(Atom::Token(t)) => t.chars().map(Atom::char).collect(),
                    other => {
                        return Err(LowerError {
                            kind: LowerErrorKind::NotStatic(other.kind_name().to_string()),
                            span: iter.span,
                        })
                    }
                };
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    let v = self.with_binding(var, Value::Atom(item), local, |this, local| {
                        this.lower_in(body, local)
                    })?;
                    match v {
                        Value::Atom(a) => out.push(a),
                        other => {
                            return Err(LowerError {
                                kind: LowerErrorKind::NotStatic(format!(
                                    "{} as a comprehension element",
                                    other.kind_name()
                                )),
                                span: body.span,
                            })
                        }
                    }
                }
                Ok(Value::List(out))
            }
            ExprKind::Index { target, index } => {
                let t = self.lower_in(target, local)?;
                let i = self.lower_in(index, local)?;
                match (t, i) {
                    (Value::List(items), Value::Atom(i)) => {
                        let k = static_index(&i, items.len()).map_err(|e| build(e.into()))?;
                        Ok(Value::Atom(items[k].clone()))
                    }
                    (Value::Atom(Atom::Token(s)), Value::Atom(i)) => {
                        let chars: Vec<char> = s.chars().collect();
                        let k = static_index(&i, chars.len()).map_err(|e| build(e.into()))?;
                        Ok(Value::Atom(Atom::char(chars[k])))
                    }
                    (Value::List(items), Value::SOp(i)) => self
                        .graph
                        .map(Op::Index(items), &[i])
                        .map(Value::SOp)
                        .map_err(build),
                    (t, _) => Err(LowerError {
                        kind: LowerErrorKind::NotStatic(format!("indexing into {}", t.kind_name())),
                        span: target.span,
                    }),
                }
            }
        }
    }

    /// Runs `f` with `name` temporarily bound in the innermost scope.
    fn with_binding<T>(
        &mut self,
        name: &str,
        value: Value,
        local: &mut Option<&mut Frame>,
        f: impl FnOnce(&mut Self, &mut Option<&mut Frame>) -> T,
    ) -> T {
        match local {
            Some(frame) => {
                let saved = frame.vars.insert(name.to_string(), value);
                let out = f(self, local);
                let frame = local.as_mut().expect("frame still present");
                match saved {
                    Some(v) => frame.vars.insert(name.to_string(), v),
                    None => frame.vars.remove(name),
                };
                out
            }
            None => {
                let mut frame = Frame {
                    vars: HashMap::from([(name.to_string(), value)]),
                    parent: None,
                };
                f(self, &mut Some(&mut frame))
            }
        }
    }

    fn coerce_sop(&mut self, v: Value, span: Span) -> Result<SOp, LowerError> {
        match v {
            Value::SOp(s) => Ok(s),
            Value::Atom(a) => Ok(self.graph.constant(a)),
            other => Err(LowerError {
                kind: LowerErrorKind::Type(format!(
                    "expected an s-op, found {}",
                    other.kind_name()
                )),
                span,
            }),
        }
    }

    fn to_selector(&self, v: Value, span: Span) -> Result<Selector, LowerError> {
        match v {
            Value::Selector(s) => Ok(s),
            other => Err(LowerError {
                kind: LowerErrorKind::Type(format!(
                    "expected a selector, found {}",
                    other.kind_name()
                )),
                span,
            }),
        }
    }

    fn to_atom(&self, v: Value, span: Span) -> Result<Atom, LowerError> {
        match v {
            Value::Atom(a) => Ok(a),
            other => Err(LowerError {
                kind: LowerErrorKind::Type(format!(
                    "expected a constant, found {}",
                    other.kind_name()
                )),
                span,
            }),
        }
    }

    /// Applies `op` to atoms and s-ops. All-atom operands stay atoms.
    fn elementwise(&mut self, op: Op, operands: &[Value], span: Span) -> Result<Value, LowerError> {
        let build = |e: BuildError| LowerError {
            kind: LowerErrorKind::Build(e),
            span,
        };
        let atoms: Option<Vec<&Atom>> = operands
            .iter()
            .map(|v| match v {
                Value::Atom(a) => Some(a),
                _ => None,
            })
            .collect();
        if let Some(atoms) = atoms {
            return op
                .apply(&atoms)
                .map(Value::Atom)
                .map_err(|e| build(e.into()));
        }
        let mut args = Vec::with_capacity(operands.len());
        for v in operands {
            if !matches!(v, Value::SOp(_) | Value::Atom(_)) {
                return Err(LowerError {
                    kind: LowerErrorKind::Type(format!(
                        "`{}` cannot be applied to {}",
                        op.name(),
                        v.kind_name()
                    )),
                    span,
                });
            }
            args.push(self.coerce_sop(v.clone(), span)?);
        }
        self.graph.map(op, &args).map(Value::SOp).map_err(build)
    }

    fn binary(
        &mut self,
        op: BinaryOp,
        l: Value,
        r: Value,
        span: Span,
    ) -> Result<Value, LowerError> {
        let type_err = |l: &Value, r: &Value| LowerError {
            kind: LowerErrorKind::Type(format!(
                "`{}` is not defined for {} and {}",
                op.symbol(),
                l.kind_name(),
                r.kind_name()
            )),
            span,
        };
        match (op, &l, &r) {
            (BinaryOp::And, Value::Selector(a), Value::Selector(b)) => {
                return Ok(Value::Selector(self.graph.select_and(*a, *b)))
            }
            (BinaryOp::Or, Value::Selector(a), Value::Selector(b)) => {
                return Ok(Value::Selector(self.graph.select_or(*a, *b)))
            }
            (BinaryOp::In, Value::Atom(v), Value::SOp(seq)) => {
                return Ok(Value::SOp(self.graph.contains(v.clone(), *seq)))
            }
            (BinaryOp::In, Value::SOp(seq), Value::List(items)) => {
                return self
                    .graph
                    .map(Op::In(items.clone()), &[*seq])
                    .map(Value::SOp)
                    .map_err(|e| LowerError {
                        kind: LowerErrorKind::Build(e),
                        span,
                    })
            }
            (BinaryOp::In, Value::Atom(v), Value::List(items)) => {
                return Ok(Value::Atom(Atom::Bool(items.contains(v))))
            }
            (BinaryOp::In, Value::Atom(Atom::Token(needle)), Value::Atom(Atom::Token(hay))) => {
                return Ok(Value::Atom(Atom::Bool(hay.contains(&**needle))))
            }
            (BinaryOp::In, _, _) => return Err(type_err(&l, &r)),
            _ => {}
        }
        let elementwise_operand = |v: &Value| matches!(v, Value::SOp(_) | Value::Atom(_));
        if !elementwise_operand(&l) || !elementwise_operand(&r) {
            return Err(type_err(&l, &r));
        }
        let op = match op {
            BinaryOp::Add => Op::Add,
            BinaryOp::Sub => Op::Sub,
            BinaryOp::Mul => Op::Mul,
            BinaryOp::Div => Op::Div,
            BinaryOp::Mod => Op::Mod,
            BinaryOp::Compare(p) => Op::Compare(p),
            BinaryOp::And => Op::And,
            BinaryOp::Or => Op::Or,
            BinaryOp::In => unreachable!("handled above"),
        };
        self.elementwise(op, &[l, r], span)
    }

    fn call_builtin(
        &mut self,
        builtin: Builtin,
        args: Vec<(Option<String>, Value, Span)>,
        span: Span,
    ) -> Result<Value, LowerError> {
        let build = |e: BuildError| LowerError {
            kind: LowerErrorKind::Build(e),
            span,
        };
        let name = builtin.name();
        let params: &[&str] = match builtin {
            Builtin::Select => &["keys", "queries", "predicate"],
            Builtin::Aggregate => &["selector", "values", "default"],
            Builtin::SelectorWidth => &["selector", "assume_bos"],
            Builtin::Indicator | Builtin::Round => &["value"],
            Builtin::SelectEq | Builtin::Score => &["keys", "queries"],
            Builtin::SelectBest => &["selector", "scorer"],
        };
        let optional = match builtin {
            Builtin::Aggregate | Builtin::SelectorWidth => 1,
            _ => 0,
        };
        let mut slots = bind_arguments(name, params, optional, args, span)?;
        let mut take = |i: usize| slots[i].take();
        match builtin {
            Builtin::Select | Builtin::SelectEq => {
                let (k, kspan) = take(0).expect("required");
                let (q, qspan) = take(1).expect("required");
                let predicate = match builtin {
                    Builtin::SelectEq => Predicate::Eq,
                    _ => match take(2).expect("required") {
                        (Value::Predicate(p), _) => p,
                        (other, pspan) => {
                            return Err(LowerError {
                                kind: LowerErrorKind::Arguments {
                                    name: name.into(),
                                    message: format!(
                                        "the third argument must be a comparison such as `==`, found {}",
                                        other.kind_name()
                                    ),
                                },
                                span: pspan,
                            })
                        }
                    },
                };
                let k = self.coerce_sop(k, kspan)?;
                let q = self.coerce_sop(q, qspan)?;
                Ok(Value::Selector(self.graph.select(k, q, predicate)))
            }
            Builtin::Aggregate => {
                let (s, sspan) = take(0).expect("required");
                let (v, vspan) = take(1).expect("required");
                let default = match take(2) {
                    Some((d, dspan)) => self.to_atom(d, dspan)?,
                    None => Atom::int(0),
                };
                let s = self.to_selector(s, sspan)?;
                let v = self.coerce_sop(v, vspan)?;
                Ok(Value::SOp(self.graph.aggregate(s, v, default)))
            }
            Builtin::SelectorWidth => {
                let (s, sspan) = take(0).expect("required");
                let assume_bos = match take(1) {
                    Some((b, bspan)) => self
                        .to_atom(b, bspan)?
                        .as_bool()
                        .map_err(|e| build(e.into()))?,
                    None => false,
                };
                let s = self.to_selector(s, sspan)?;
                Ok(Value::SOp(self.graph.selector_width(s, assume_bos)))
            }
            Builtin::Indicator | Builtin::Round => {
                let (v, _) = take(0).expect("required");
                let op = if builtin == Builtin::Round {
                    Op::Round
                } else {
                    Op::Indicator
                };
                self.elementwise(op, &[v], span)
            }
            Builtin::Score => {
                let (k, kspan) = take(0).expect("required");
                let (q, qspan) = take(1).expect("required");
                let k = self.coerce_sop(k, kspan)?;
                let q = self.coerce_sop(q, qspan)?;
                self.graph.score(k, q).map(Value::Scorer).map_err(build)
            }
            Builtin::SelectBest => {
                let (s, sspan) = take(0).expect("required");
                let (c, cspan) = take(1).expect("required");
                let s = self.to_selector(s, sspan)?;
                let c = match c {
                    Value::Scorer(c) => c,
                    other => {
                        return Err(LowerError {
                            kind: LowerErrorKind::Type(format!(
                                "expected a scorer, found {}",
                                other.kind_name()
                            )),
                            span: cspan,
                        })
                    }
                };
                self.graph
                    .select_best(s, c)
                    .map(Value::Selector)
                    .map_err(build)
            }
        }
    }

    fn call_function(
        &mut self,
        closure: &Rc<Closure>,
        args: Vec<(Option<String>, Value, Span)>,
        span: Span,
    ) -> Result<Value, LowerError> {
        let def = &closure.def;
        if self.depth >= RECURSION_LIMIT {
            return Err(LowerError {
                kind: LowerErrorKind::RecursionLimit(RECURSION_LIMIT),
                span,
            });
        }
        let params: Vec<&str> = def.params.iter().map(|p| p.name.as_str()).collect();
        let slots = bind_arguments(&def.name, &params, def.params.len(), args, span)?;
        let mut frame = Frame {
            vars: HashMap::new(),
            parent: closure.captured.clone(),
        };
        self.depth += 1;
        let result = (|| {
            for (param, slot) in def.params.iter().zip(slots) {
                let value = match (slot, &param.default) {
                    (Some((v, _)), _) => v,
                    (None, Some(default)) => self.lower(default, Some(&mut frame))?,
                    (None, None) => {
                        return Err(LowerError {
                            kind: LowerErrorKind::Arguments {
                                name: def.name.clone(),
                                message: format!("missing argument `{}`", param.name),
                            },
                            span,
                        })
                    }
                };
                frame.vars.insert(param.name.clone(), value);
            }
            for stmt in &def.body {
                self.exec_local(stmt, &mut frame)?;
            }
            self.lower(&def.ret, Some(&mut frame))
        })();
        self.depth -= 1;
        result
    }

    fn exec_local(&mut self, stmt: &Stmt, frame: &mut Frame) -> Result<(), LowerError> {
        match stmt {
            Stmt::Assign { name, value, .. } => {
                let value = self.lower(value, Some(frame))?;
                if let Some(id) = value.node() {
                    self.graph.set_label(id, name, false);
                }
                frame.vars.insert(name.clone(), value);
            }
            Stmt::Def(def) => {
                let captured = Rc::new(frame.clone());
                let closure = Closure {
                    def: def.clone(),
                    captured: Some(captured),
                };
                frame
                    .vars
                    .insert(def.name.clone(), Value::Function(Rc::new(closure)));
            }
            Stmt::Expr(e) => {
                self.lower(e, Some(frame))?;
            }
            Stmt::Return(e) => {
                // the parser only leaves returns inside bodies as the final `ret`
                return Err(LowerError {
                    kind: LowerErrorKind::ReturnOutsideFunction,
                    span: e.span,
                });
            }
            Stmt::SetExample { span, .. } | Stmt::Draw { span, .. } => {
                return Err(LowerError {
                    kind: LowerErrorKind::Type(
                        "directives are only allowed at the top level".into(),
                    ),
                    span: *span,
                })
            }
        }
        Ok(())
    }
}

/// Matches positional and keyword arguments to parameter slots. The last
/// `optional` parameters may be left empty.
fn bind_arguments(
    name: &str,
    params: &[&str],
    optional: usize,
    args: Vec<(Option<String>, Value, Span)>,
    span: Span,
) -> Result<Vec<Option<(Value, Span)>>, LowerError> {
    let fail = |message: String, span: Span| LowerError {
        kind: LowerErrorKind::Arguments {
            name: name.to_string(),
            message,
        },
        span,
    };
    let mut slots: Vec<Option<(Value, Span)>> = vec![None; params.len()];
    let mut positional = 0;
    for (keyword, value, arg_span) in args {
        let slot = match keyword {
            None => {
                if positional >= params.len() {
                    return Err(fail(
                        format!("takes at most {} arguments", params.len()),
                        arg_span,
                    ));
                }
                positional += 1;
                positional - 1
            }
            Some(k) => params
                .iter()
                .position(|p| *p == k)
                .ok_or_else(|| fail(format!("unknown keyword argument `{k}`"), arg_span))?,
        };
        if slots[slot].is_some() {
            return Err(fail(
                format!("`{}` given more than once", params[slot]),
                arg_span,
            ));
        }
        slots[slot] = Some((value, arg_span));
    }
    let required = params.len() - optional;
    if let Some(missing) = slots[..required].iter().position(Option::is_none) {
        return Err(fail(
            format!("missing argument `{}`", params[missing]),
            span,
        ));
    }
    Ok(slots)
}

fn static_index(index: &Atom, len: usize) -> Result<usize, crate::error::ModelError> {
    let out_of_range = || crate::error::ModelError::IndexOutOfRange {
        index: index.to_string(),
        len,
    };
    let i = index.as_index().ok_or_else(out_of_range)?;
    let k = if i < 0 { i + len as i64 } else { i };
    if k < 0 || k as usize >= len {
        return Err(out_of_range());
    }
    Ok(k as usize)
}
