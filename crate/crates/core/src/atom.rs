//! Scalar values, sequences and comparison predicates.
//!
//! Every s-op evaluates to a [`Sequence`] of [`Atom`]s with the same length as
//! the input. Atoms are tokens, real numbers, booleans or the null padding
//! value. The coercion and comparison rules here are shared by the evaluator
//! and by constant folding in the frontend.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Relative distance to the nearest integer below which arithmetic results are
/// snapped onto that integer.
const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Atom {
    Token(Arc<str>),
    Number(f64),
    Bool(bool),
    Null,
}

impl Atom {
    /// Builds a token atom. Tokens are never empty.
    pub fn token(text: impl Into<Arc<str>>) -> Result<Atom, ModelError> {
        let text = text.into();
        if text.is_empty() {
            return Err(ModelError::EmptyToken);
        }
        Ok(Atom::Token(text))
    }

    pub fn char(c: char) -> Atom {
        Atom::Token(Arc::from(c.to_string()))
    }

    /// Builds a number atom, rejecting NaN and infinities.
    pub fn number(value: f64) -> Result<Atom, ModelError> {
        if value.is_finite() {
            Ok(Atom::Number(if value == 0.0 { 0.0 } else { value }))
        } else {
            Err(ModelError::NonFinite)
        }
    }

    pub fn int(value: i64) -> Atom {
        Atom::Number(value as f64)
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Atom::Token(_) => "token",
            Atom::Number(_) => "number",
            Atom::Bool(_) => "bool",
            Atom::Null => "null",
        }
    }

    pub fn as_bool(&self) -> Result<bool, ModelError> {
        match self {
            Atom::Bool(b) => Ok(*b),
            other => Err(ModelError::NotBoolean {
                found: other.variant_name(),
            }),
        }
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            Atom::Token(t) => Some(t),
            _ => None,
        }
    }

    /// Interprets the atom as an integer index, if it is a whole number.
    pub fn as_index(&self) -> Option<i64> {
        match self {
            Atom::Number(x) if x.fract() == 0.0 => Some(*x as i64),
            _ => None,
        }
    }
}

/// Numeric view of an atom: numbers pass through, booleans become 1 or 0.
pub fn coerce_numeric(atom: &Atom) -> Result<f64, ModelError> {
    match atom {
        Atom::Number(x) => Ok(*x),
        Atom::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
        other => Err(ModelError::NotNumeric {
            found: other.variant_name(),
        }),
    }
}

/// Snaps values that sit within rounding noise of an integer onto it, and
/// rejects non-finite results.
pub(crate) fn settle(value: f64) -> Result<Atom, ModelError> {
    if !value.is_finite() {
        return Err(ModelError::NonFinite);
    }
    let nearest = value.round();
    if (value - nearest).abs() <= SNAP_TOLERANCE * nearest.abs().max(1.0) {
        Atom::number(nearest)
    } else {
        Atom::number(value)
    }
}

// Structural equality: numbers compare by bit pattern so atoms can be used as
// hash-consing keys. Semantic comparison goes through `Predicate`.
impl PartialEq for Atom {
    fn eq(&self, other: &Atom) -> bool {
        match (self, other) {
            (Atom::Token(a), Atom::Token(b)) => a == b,
            (Atom::Number(a), Atom::Number(b)) => a.to_bits() == b.to_bits(),
            (Atom::Bool(a), Atom::Bool(b)) => a == b,
            (Atom::Null, Atom::Null) => true,
            _ => false,
        }
    }
}

impl Eq for Atom {}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Atom::Token(t) => t.hash(state),
            Atom::Number(x) => x.to_bits().hash(state),
            Atom::Bool(b) => b.hash(state),
            Atom::Null => {}
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Token(t) => f.write_str(t),
            Atom::Number(x) => write!(f, "{}", format_number(*x)),
            Atom::Bool(true) => f.write_str("T"),
            Atom::Bool(false) => f.write_str("F"),
            Atom::Null => f.write_str("-"),
        }
    }
}

impl From<bool> for Atom {
    fn from(b: bool) -> Atom {
        Atom::Bool(b)
    }
}

pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Atom::Token(t) => serializer.serialize_str(t),
            Atom::Number(x) if x.fract() == 0.0 && x.abs() < 1e15 => {
                serializer.serialize_i64(*x as i64)
            }
            Atom::Number(x) => serializer.serialize_f64(*x),
            Atom::Bool(b) => serializer.serialize_bool(*b),
            Atom::Null => serializer.serialize_none(),
        }
    }
}

/// The value of an s-op on one input: one atom per input position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Sequence(Vec<Atom>);

impl Sequence {
    pub fn new(items: Vec<Atom>) -> Sequence {
        Sequence(items)
    }

    /// One token per character of `text`.
    pub fn from_chars(text: &str) -> Sequence {
        Sequence(text.chars().map(Atom::char).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[Atom] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Atom> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Atom> {
        self.0
    }

    /// The concatenated text of the sequence when every item is a
    /// single-character token.
    pub fn as_text(&self) -> Option<String> {
        self.0
            .iter()
            .map(|a| match a {
                Atom::Token(t) if t.chars().count() == 1 => Some(&**t),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(|parts| parts.concat())
    }
}

impl std::ops::Index<usize> for Sequence {
    type Output = Atom;

    fn index(&self, i: usize) -> &Atom {
        &self.0[i]
    }
}

impl FromIterator<Atom> for Sequence {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Sequence {
        Sequence(iter.into_iter().collect())
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(text) = self.as_text() {
            return f.write_str(&text);
        }
        f.write_str("[")?;
        for (i, atom) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{atom}")?;
        }
        f.write_str("]")
    }
}

/// `n` copies of `atom`.
pub fn broadcast_const(atom: &Atom, n: usize) -> Sequence {
    Sequence(vec![atom.clone(); n])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Predicate {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Predicate {
    pub const ALL: [Predicate; 6] = [
        Predicate::Eq,
        Predicate::Ne,
        Predicate::Lt,
        Predicate::Le,
        Predicate::Gt,
        Predicate::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Predicate::Eq => "==",
            Predicate::Ne => "!=",
            Predicate::Lt => "<",
            Predicate::Le => "<=",
            Predicate::Gt => ">",
            Predicate::Ge => ">=",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.symbol() == symbol)
    }

    /// Evaluates `key <op> query`.
    pub fn apply(self, key: &Atom, query: &Atom) -> Result<bool, ModelError> {
        match self {
            Predicate::Eq => Ok(atoms_equal(key, query)),
            Predicate::Ne => Ok(!atoms_equal(key, query)),
            order => {
                let ord = order_atoms(key, query).ok_or(ModelError::Incomparable {
                    predicate: order.symbol(),
                    left: key.variant_name(),
                    right: query.variant_name(),
                })?;
                Ok(match order {
                    Predicate::Lt => ord == Ordering::Less,
                    Predicate::Le => ord != Ordering::Greater,
                    Predicate::Gt => ord == Ordering::Greater,
                    Predicate::Ge => ord != Ordering::Less,
                    Predicate::Eq | Predicate::Ne => unreachable!(),
                })
            }
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

pub fn apply_predicate(p: Predicate, key: &Atom, query: &Atom) -> Result<bool, ModelError> {
    p.apply(key, query)
}

fn is_numeric(atom: &Atom) -> bool {
    matches!(atom, Atom::Number(_) | Atom::Bool(_))
}

fn atoms_equal(a: &Atom, b: &Atom) -> bool {
    match (a, b) {
        (Atom::Token(x), Atom::Token(y)) => x == y,
        (Atom::Bool(x), Atom::Bool(y)) => x == y,
        (Atom::Null, Atom::Null) => true,
        (x, y) if is_numeric(x) && is_numeric(y) => {
            coerce_numeric(x).ok() == coerce_numeric(y).ok()
        }
        _ => false,
    }
}

fn order_atoms(a: &Atom, b: &Atom) -> Option<Ordering> {
    match (a, b) {
        (Atom::Token(x), Atom::Token(y)) => Some(x.cmp(y)),
        (x, y) if is_numeric(x) && is_numeric(y) => coerce_numeric(x)
            .ok()?
            .partial_cmp(&coerce_numeric(y).ok()?),
        _ => None,
    }
}
