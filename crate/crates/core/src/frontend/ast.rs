use std::fmt;

use crate::atom::{format_number, Predicate};

use super::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Compare(Predicate),
    In,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Compare(p) => p.symbol(),
            BinaryOp::In => "in",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Str(String),
    Bool(bool),
    Ident(String),
    /// A bare comparison symbol, only meaningful as the predicate of `select`.
    Predicate(Predicate),
    Unary {
        op: UnaryOp,
        expr: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// `then if cond else otherwise`
    Ternary {
        then: Box<Expr>,
        cond: Box<Expr>,
        otherwise: Box<Expr>,
    },
    Call {
        callee: String,
        args: Vec<Arg>,
    },
    List(Vec<Expr>),
    /// `[body for var in iter]`
    Comprehension {
        body: Box<Expr>,
        var: String,
        iter: Box<Expr>,
    },
    Index {
        target: Box<Expr>,
        index: Box<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub default: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub ret: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Assign {
        name: String,
        value: Expr,
        span: Span,
    },
    Expr(Expr),
    Def(FunctionDef),
    /// `return` outside of a function body; rejected when lowered.
    Return(Expr),
    /// `set example "...";`
    SetExample {
        value: String,
        span: Span,
    },
    /// `draw(target, "...");`
    Draw {
        target: Expr,
        input: String,
        span: Span,
    },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Assign { span, .. } | Stmt::SetExample { span, .. } | Stmt::Draw { span, .. } => {
                *span
            }
            Stmt::Expr(e) | Stmt::Return(e) => e.span,
            Stmt::Def(def) => def.span,
        }
    }
}

// Spans are positional metadata; stripping them gives the structural shape
// used to compare trees parsed from different texts.
impl Expr {
    pub fn without_spans(&self) -> Expr {
        let b = |e: &Expr| Box::new(e.without_spans());
        let kind = match &self.kind {
            ExprKind::Unary { op, expr } => ExprKind::Unary {
                op: *op,
                expr: b(expr),
            },
            ExprKind::Binary { op, lhs, rhs } => ExprKind::Binary {
                op: *op,
                lhs: b(lhs),
                rhs: b(rhs),
            },
            ExprKind::Ternary {
                then,
                cond,
                otherwise,
            } => ExprKind::Ternary {
                then: b(then),
                cond: b(cond),
                otherwise: b(otherwise),
            },
            ExprKind::Call { callee, args } => ExprKind::Call {
                callee: callee.clone(),
                args: args
                    .iter()
                    .map(|a| Arg {
                        name: a.name.clone(),
                        value: a.value.without_spans(),
                    })
                    .collect(),
            },
            ExprKind::List(items) => {
                ExprKind::List(items.iter().map(Expr::without_spans).collect())
            }
            ExprKind::Comprehension { body, var, iter } => ExprKind::Comprehension {
                body: b(body),
                var: var.clone(),
                iter: b(iter),
            },
            ExprKind::Index { target, index } => ExprKind::Index {
                target: b(target),
                index: b(index),
            },
            leaf => leaf.clone(),
        };
        Expr {
            kind,
            span: Span::default(),
        }
    }
}

impl Stmt {
    pub fn without_spans(&self) -> Stmt {
        let none = Span::default();
        match self {
            Stmt::Assign { name, value, .. } => Stmt::Assign {
                name: name.clone(),
                value: value.without_spans(),
                span: none,
            },
            Stmt::Expr(e) => Stmt::Expr(e.without_spans()),
            Stmt::Return(e) => Stmt::Return(e.without_spans()),
            Stmt::Def(def) => Stmt::Def(FunctionDef {
                name: def.name.clone(),
                params: def
                    .params
                    .iter()
                    .map(|p| Param {
                        name: p.name.clone(),
                        default: p.default.as_ref().map(Expr::without_spans),
                    })
                    .collect(),
                body: def.body.iter().map(Stmt::without_spans).collect(),
                ret: def.ret.without_spans(),
                span: none,
            }),
            Stmt::SetExample { value, .. } => Stmt::SetExample {
                value: value.clone(),
                span: none,
            },
            Stmt::Draw { target, input, .. } => Stmt::Draw {
                target: target.without_spans(),
                input: input.clone(),
                span: none,
            },
        }
    }
}

fn write_string(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

/// Fully parenthesised rendering; parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Number(x) if *x < 0.0 => write!(f, "(-{})", format_number(-x)),
            ExprKind::Number(x) => f.write_str(&format_number(*x)),
            ExprKind::Str(s) => write_string(f, s),
            ExprKind::Bool(true) => f.write_str("True"),
            ExprKind::Bool(false) => f.write_str("False"),
            ExprKind::Ident(name) => f.write_str(name),
            ExprKind::Predicate(p) => f.write_str(p.symbol()),
            ExprKind::Unary {
                op: UnaryOp::Neg,
                expr,
            } => write!(f, "(-{expr})"),
            ExprKind::Unary {
                op: UnaryOp::Not,
                expr,
            } => write!(f, "(not {expr})"),
            ExprKind::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            ExprKind::Ternary {
                then,
                cond,
                otherwise,
            } => write!(f, "({then} if {cond} else {otherwise})"),
            ExprKind::Call { callee, args } => {
                write!(f, "{callee}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if let Some(name) = &arg.name {
                        write!(f, "{name} = ")?;
                    }
                    write!(f, "{}", arg.value)?;
                }
                f.write_str(")")
            }
            ExprKind::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
            ExprKind::Comprehension { body, var, iter } => {
                write!(f, "[{body} for {var} in {iter}]")
            }
            ExprKind::Index { target, index } => write!(f, "{target}[{index}]"),
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Assign { name, value, .. } => write!(f, "{name} = {value};"),
            Stmt::Expr(e) => write!(f, "{e};"),
            Stmt::Return(e) => write!(f, "return {e};"),
            Stmt::Def(def) => {
                write!(f, "def {}(", def.name)?;
                for (i, p) in def.params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(&p.name)?;
                    if let Some(d) = &p.default {
                        write!(f, "={d}")?;
                    }
                }
                f.write_str(") {\n")?;
                for stmt in &def.body {
                    writeln!(f, "    {stmt}")?;
                }
                write!(f, "    return {};\n}}", def.ret)
            }
            Stmt::SetExample { value, .. } => {
                f.write_str("set example ")?;
                write_string(f, value)?;
                f.write_str(";")
            }
            Stmt::Draw { target, input, .. } => {
                write!(f, "draw({target}, ")?;
                write_string(f, input)?;
                f.write_str(");")
            }
        }
    }
}
