//! Elementwise operations: the feed-forward part of a RASP program.

use std::fmt;
use std::sync::Arc;

use crate::atom::{coerce_numeric, settle, Atom, Predicate};
use crate::error::ModelError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Neg,
    Compare(Predicate),
    And,
    Or,
    Not,
    /// 1 for true, 0 for false.
    Indicator,
    Round,
    /// Membership of each value in a static list.
    In(Vec<Atom>),
    /// Looks each value up as a position in a static list.
    Index(Vec<Atom>),
}

impl Op {
    pub fn arity(&self) -> usize {
        match self {
            Op::Neg | Op::Not | Op::Indicator | Op::Round | Op::In(_) | Op::Index(_) => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Mod => "%",
            Op::Neg => "-",
            Op::Compare(p) => p.symbol(),
            Op::And => "and",
            Op::Or => "or",
            Op::Not => "not",
            Op::Indicator => "indicator",
            Op::Round => "round",
            Op::In(_) => "in",
            Op::Index(_) => "index",
        }
    }

    pub fn apply(&self, args: &[&Atom]) -> Result<Atom, ModelError> {
        debug_assert_eq!(args.len(), self.arity());
        match self {
            Op::Add => match (args[0], args[1]) {
                (Atom::Token(a), Atom::Token(b)) => Ok(Atom::Token(Arc::from(format!("{a}{b}")))),
                (a, b) => arithmetic(self, a, b, |x, y| Ok(x + y)),
            },
            Op::Sub => arithmetic(self, args[0], args[1], |x, y| Ok(x - y)),
            Op::Mul => arithmetic(self, args[0], args[1], |x, y| Ok(x * y)),
            Op::Div => arithmetic(self, args[0], args[1], |x, y| {
                if y == 0.0 {
                    Err(ModelError::DivisionByZero)
                } else {
                    Ok(x / y)
                }
            }),
            Op::Mod => arithmetic(self, args[0], args[1], |x, y| {
                if y == 0.0 {
                    Err(ModelError::DivisionByZero)
                } else {
                    // sign follows the divisor
                    Ok(x - y * (x / y).floor())
                }
            }),
            Op::Neg => settle(-numeric(self, args[0])?),
            Op::Compare(p) => Ok(Atom::Bool(p.apply(args[0], args[1])?)),
            Op::And => Ok(Atom::Bool(args[0].as_bool()? && args[1].as_bool()?)),
            Op::Or => Ok(Atom::Bool(args[0].as_bool()? || args[1].as_bool()?)),
            Op::Not => Ok(Atom::Bool(!args[0].as_bool()?)),
            Op::Indicator => Ok(Atom::int(args[0].as_bool()? as i64)),
            Op::Round => settle(numeric(self, args[0])?.round()),
            Op::In(list) => {
                let mut found = false;
                for item in list {
                    if Predicate::Eq.apply(args[0], item)? {
                        found = true;
                        break;
                    }
                }
                Ok(Atom::Bool(found))
            }
            Op::Index(list) => {
                let index = args[0]
                    .as_index()
                    .filter(|i| *i >= 0 && (*i as usize) < list.len());
                match index {
                    Some(i) => Ok(list[i as usize].clone()),
                    None => Err(ModelError::IndexOutOfRange {
                        index: args[0].to_string(),
                        len: list.len(),
                    }),
                }
            }
        }
    }
}

fn numeric(op: &Op, atom: &Atom) -> Result<f64, ModelError> {
    coerce_numeric(atom).map_err(|_| ModelError::Operands {
        op: op.name(),
        left: atom.variant_name(),
        right: atom.variant_name(),
    })
}

fn arithmetic(
    op: &Op,
    a: &Atom,
    b: &Atom,
    f: impl FnOnce(f64, f64) -> Result<f64, ModelError>,
) -> Result<Atom, ModelError> {
    match (coerce_numeric(a), coerce_numeric(b)) {
        (Ok(x), Ok(y)) => settle(f(x, y)?),
        _ => Err(ModelError::Operands {
            op: op.name(),
            left: a.variant_name(),
            right: b.variant_name(),
        }),
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(s: &str) -> Atom {
        Atom::token(s).unwrap()
    }

    #[test]
    fn token_concatenation() {
        assert_eq!(Op::Add.apply(&[&tok("("), &tok(")")]).unwrap(), tok("()"));
        assert!(Op::Add.apply(&[&Atom::int(1), &tok("a")]).is_err());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            Op::Div.apply(&[&Atom::int(1), &Atom::int(0)]),
            Err(ModelError::DivisionByZero)
        );
        assert_eq!(
            Op::Mod.apply(&[&Atom::int(1), &Atom::int(0)]),
            Err(ModelError::DivisionByZero)
        );
    }

    #[test]
    fn modulo_follows_divisor_sign() {
        assert_eq!(
            Op::Mod.apply(&[&Atom::int(-1), &Atom::int(2)]).unwrap(),
            Atom::int(1)
        );
        assert_eq!(
            Op::Mod.apply(&[&Atom::int(4), &Atom::int(2)]).unwrap(),
            Atom::int(0)
        );
    }

    #[test]
    fn null_arithmetic_is_an_error() {
        assert!(Op::Add.apply(&[&Atom::Null, &Atom::int(1)]).is_err());
        assert!(Op::Neg.apply(&[&Atom::Null]).is_err());
    }

    #[test]
    fn booleans_take_part_in_arithmetic() {
        assert_eq!(
            Op::Add.apply(&[&Atom::Bool(true), &Atom::int(1)]).unwrap(),
            Atom::int(2)
        );
        assert_eq!(
            Op::Indicator.apply(&[&Atom::Bool(true)]).unwrap(),
            Atom::int(1)
        );
        assert!(Op::Indicator.apply(&[&Atom::int(1)]).is_err());
    }

    #[test]
    fn membership_and_lookup() {
        let list = vec![tok("a"), tok("b"), tok("c")];
        assert_eq!(
            Op::In(list.clone()).apply(&[&tok("a")]).unwrap(),
            Atom::Bool(true)
        );
        assert_eq!(
            Op::In(list.clone()).apply(&[&tok("h")]).unwrap(),
            Atom::Bool(false)
        );
        assert_eq!(
            Op::Index(list.clone()).apply(&[&Atom::int(2)]).unwrap(),
            tok("c")
        );
        assert!(Op::Index(list).apply(&[&Atom::int(3)]).is_err());
    }
}
