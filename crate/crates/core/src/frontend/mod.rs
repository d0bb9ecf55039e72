//! Source text to graph: lexing, parsing and lowering.

pub mod ast;
mod lexer;
mod lower;
mod parser;

pub use lexer::{tokenize, Keyword, SourceToken, Span, Symbol, TokenKind};
pub use lower::{
    Builtin, Closure, Env, Interpreter, Outcome, Value, BUILTIN_NAMES, RECURSION_LIMIT,
};
pub use parser::{parse, parse_source};
