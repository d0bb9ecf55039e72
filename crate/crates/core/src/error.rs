use thiserror::Error;

use crate::frontend::Span;
use crate::graph::NodeId;

/// Type errors raised while combining atoms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("cannot apply `{predicate}` to a {left} and a {right}")]
    Incomparable {
        predicate: &'static str,
        left: &'static str,
        right: &'static str,
    },
    #[error("expected a number or bool, found a {found}")]
    NotNumeric { found: &'static str },
    #[error("expected a bool, found a {found}")]
    NotBoolean { found: &'static str },
    #[error("`{op}` is not defined for a {left} and a {right}")]
    Operands {
        op: &'static str,
        left: &'static str,
        right: &'static str,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic produced a non-finite number")]
    NonFinite,
    #[error("tokens cannot be empty")]
    EmptyToken,
    #[error("index {index} is out of range for a list of length {len}")]
    IndexOutOfRange { index: String, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("`{0}` requires the select_best extension to be enabled")]
    ExtensionDisabled(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalErrorKind {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot average {count} selected values that include a {found}")]
    NonNumericAverage { count: usize, found: &'static str },
    #[error("input sequence is empty")]
    EmptyInput,
}

/// An evaluation failure, located at a DAG node and (when applicable) an
/// input position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{}: {kind}", describe_node(*.node, .label.as_deref()), describe_position(.position, .key))]
pub struct EvalError {
    pub node: NodeId,
    pub label: Option<String>,
    pub position: Option<usize>,
    /// Column index for errors raised while filling a selection matrix.
    pub key: Option<usize>,
    pub kind: EvalErrorKind,
}

fn describe_node(node: NodeId, label: Option<&str>) -> String {
    match label {
        Some(name) => format!("in `{name}`"),
        None => format!("in node {}", node.index()),
    }
}

fn describe_position(position: &Option<usize>, key: &Option<usize>) -> String {
    match (position, key) {
        (Some(q), Some(k)) => format!(" at (query {q}, key {k})"),
        (Some(q), None) => format!(" at position {q}"),
        _ => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub expected: Vec<String>,
    pub found: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerErrorKind {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("`{0}` is not a function")]
    NotCallable(String),
    #[error("comprehensions and indexing need a static list, found {0}")]
    NotStatic(String),
    #[error("`return` outside of a function")]
    ReturnOutsideFunction,
    #[error("built-in `{0}` cannot be rebound at the top level")]
    BuiltinRebind(String),
    #[error("{0}")]
    Type(String),
    #[error("wrong arguments to `{name}`: {message}")]
    Arguments { name: String, message: String },
    #[error("function expansion deeper than {0} calls")]
    RecursionLimit(usize),
    #[error(transparent)]
    Build(#[from] BuildError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct LowerError {
    pub kind: LowerErrorKind,
    pub span: Span,
}

/// Any failure while turning source text into values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("lex error at {0}")]
    Lex(#[from] LexError),
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("error at {0}")]
    Lower(#[from] LowerError),
    #[error("evaluation error {0}")]
    Eval(#[from] EvalError),
}

impl Error {
    /// True for lexing and parsing failures.
    pub fn is_syntax(&self) -> bool {
        matches!(self, Error::Lex(_) | Error::Parse(_))
    }
}
